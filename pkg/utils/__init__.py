# Utils package: logging and exceptions
