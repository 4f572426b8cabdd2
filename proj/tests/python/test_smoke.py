import fock_metrology as fm


def test_import():
    assert fm.__version__
