"""A failing party must not deadlock the run: the peer unblocks and the root
cause propagates."""

import numpy as np
import pytest

from blindboost.encoding import Dataset, fold_labels
from blindboost.protocol import HE_GC, ProtocolConfig, run_learning
from blindboost.protocol.parties import CSPParty


def test_csp_failure_propagates_without_deadlock(monkeypatch):
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, size=(6, 2))
    X = (X - X.mean(axis=0)) / X.std(axis=0)
    y = rng.choice([-1, 1], size=6).astype(np.int8)
    folded = fold_labels(Dataset(X, y))

    class Boom(RuntimeError):
        pass

    def broken(self, ch):
        raise Boom("csp died")

    monkeypatch.setattr(CSPParty, "result_eval_step", broken)
    cfg = ProtocolConfig(construction=HE_GC, tau=1, p_max=2, ot_mode="dealer")
    with pytest.raises(Boom, match="csp died"):
        run_learning(cfg, folded)
