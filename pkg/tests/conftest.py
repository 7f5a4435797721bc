import pytest

from data_io import load_node_fixture
from grid_manager import GridOrganizationManager
from models import FeedbackVector, SecurityProfile

# 参考安全因子 (as, avc, fc, am, bf, na, ips)
SECURITY_ROWS = {
    'N1': (0.25, 0.54, 0.66, 0.6, 0.6, 0.7, 0.6),
    'N2': (0.2, 0.5, 0.7, 0.59, 0.59, 0.8, 0.87),
    'N3': (0.6, 0.37, 0.89, 0.51, 0.67, 0.73, 0.79),
    'N4': (0.15, 0.21, 0.45, 0.57, 0.39, 0.23, 0.38),
    'N5': (0.145, 0.7725, 0.7775, 0.675, 0.7075, 0.675, 0.7),
    'N6': (0.6, 0.37, 0.89, 0.51, 0.67, 0.73, 0.79),
    'N7': (0.51, 0.42, 0.5, 0.56, 0.7, 0.4, 0.61),
}

# 参考反馈属性 (nc, ni, nt, np, np2, nu, nr, na_auth)
FEEDBACK_ROWS = {
    'N1': (0.25, 0.29, 0.3, 0.35, 0.4, 0.31, 0.12, 0.35),
    'N2': (0.68, 0.69, 1, 0.4, 0.1, 0.35, 0.21, 0.7),
    'N3': (0.6, 0.7, 0.8, 0.25, 0, 0.21, 0.6, 0.58),
    'N4': (0.71, 0.77, 0.85, 0.52, 0.23, 0.58, 0.15, 0.67),
    'N5': (0.46, 0.463, 0.47, 0.43, 0.3, 0.44, 0.19, 0.44),
    'N6': (0.54, 0.725, 0.75, 0.465, 0.4, 0.5, 0.5, 0.6),
    'N7': (0.75, 0.8, 0.9, 0.28, 0.15, 0.32, 0.51, 0.55),
}

FEEDBACK_NAMES = ('nc', 'ni', 'nt', 'np', 'np2', 'nu', 'nr', 'na_auth')

# 印刷的RF值
PRINTED_RF = {'N1': 0.422, 'N2': 0.561, 'N3': 0.599, 'N4': 0.452, 'N5': 0.517, 'N6': 0.607, 'N7': 0.53}


def make_profile(values) -> SecurityProfile:
    return SecurityProfile(*values)


def make_feedback(values, names=FEEDBACK_NAMES) -> FeedbackVector:
    return FeedbackVector(tuple(zip(names, values)))


def uniform_feedback(value: float) -> FeedbackVector:
    return make_feedback([value] * len(FEEDBACK_NAMES))


@pytest.fixture
def reference_nodes():
    return load_node_fixture('paper_nodes')


@pytest.fixture
def reference_gom(reference_nodes):
    return GridOrganizationManager.from_fixture(reference_nodes)


@pytest.fixture
def profile_n1():
    return make_profile(SECURITY_ROWS['N1'])
