import random

import pytest

from blindboost import paillier


@pytest.fixture(scope="session")
def keypair_512():
    """One 512-bit test key shared across the suite (keygen is the slow part)."""
    return paillier.keygen(512, random.Random(0xBB512))


@pytest.fixture(scope="session")
def keypair_512_alt():
    return paillier.keygen(512, random.Random(0xA17))
