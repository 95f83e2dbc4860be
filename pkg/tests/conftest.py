import pytest

from pdws import ModelHandle, OracleSuite, WatermarkParams, keygen


@pytest.fixture(scope="session")
def suite():
    return OracleSuite(b"t-sign", b"t-mask", b"t-bit")


@pytest.fixture(scope="session")
def model64():
    return ModelHandle(kind="uniform-mock")


@pytest.fixture(scope="session")
def schnorr_keys():
    return keygen(b"test-schnorr-fixture")


@pytest.fixture(scope="session")
def ed_keys():
    return keygen(b"test-ed-fixture", scheme_id="ed25519")


@pytest.fixture(scope="session")
def params328():
    # default layout, attempt cap raised so embed failures are negligible
    return WatermarkParams(a_max=64)


@pytest.fixture(scope="session")
def params_beta1():
    return WatermarkParams(beta=1, a_max=64, n=5776)


@pytest.fixture(scope="session")
def params_gamma0():
    return WatermarkParams(gamma_max=0, lambda_c=328, a_max=64, n=2640)


def make_blocked_script(params, forced_blocks, char="Q"):
    """Script one gadget cycle: listed blocks fully forced, rest free.

    Block 0 is the message block; signature blocks are 1..n_blocks.
    """
    segments = []
    for j in range(1 + params.n_blocks):
        if j in forced_blocks:
            segments.append(("forced", char * params.ell))
        else:
            segments.append(("free", params.ell))
    return ModelHandle(
        kind="scripted-mock",
        script=tuple(segments),
        script_cycle=True,
    )
