# Services package: scoring, simulation, replication
