import threading

import pytest

from blindboost.errors import PhaseOrderViolation, TransportClosed
from blindboost.protocol.transcript import Transcript
from blindboost.protocol.transport import memory_pair, socket_pair


@pytest.mark.parametrize("factory", [memory_pair, socket_pair])
def test_round_trip_and_framing(factory):
    a, b, transcript = factory()
    a.send("SETUP", b"hello")
    a.send("BASE_APPLY", b"")
    phase, payload = b.recv()
    assert (phase, payload) == ("SETUP", b"hello")
    phase, payload = b.recv()
    assert (phase, payload) == ("BASE_APPLY", b"")
    b.send("DONE", b"\x01\x02")
    assert a.recv() == ("DONE", b"\x01\x02")
    # framed length = payload + 1 phase byte + 4 length bytes
    assert transcript.messages[0] == ("cloud->csp", "SETUP", 10)
    assert transcript.messages[1] == ("cloud->csp", "BASE_APPLY", 5)
    assert transcript.messages[2] == ("csp->cloud", "DONE", 7)
    if hasattr(a, "close"):
        a.close()
        b.close()


def test_socket_close_raises():
    a, b, _ = socket_pair()
    a.close()
    with pytest.raises(TransportClosed):
        b.recv()


def test_memory_close_raises():
    a, b, _ = memory_pair()
    a.close()
    with pytest.raises(TransportClosed):
        b.recv()


def test_large_payload_over_socket():
    a, b, _ = socket_pair()
    blob = bytes(range(256)) * 4096  # 1 MiB
    result = {}

    def reader():
        result["msg"] = b.recv()

    worker = threading.Thread(target=reader)
    worker.start()
    a.send("GC_TABLES", blob)
    worker.join(timeout=30)
    assert result["msg"] == ("GC_TABLES", blob)
    a.close()
    b.close()


def test_phase_order_validation():
    t = Transcript()
    t.record("cloud->csp", "SETUP", b"")
    t.record("cloud->csp", "BASE_APPLY", b"")
    t.record("cloud->csp", "RESULT_EVAL_MASK", b"")
    t.record("csp->cloud", "GC_TABLES", b"")
    t.record("csp->cloud", "OT", b"")
    t.record("cloud->csp", "OUTPUT_LABELS", b"")
    t.record("cloud->csp", "DONE", b"")
    t.validate_phase_order()
    bad = Transcript()
    bad.record("cloud->csp", "OT", b"")
    bad.record("cloud->csp", "DONE", b"")
    with pytest.raises(PhaseOrderViolation):
        bad.validate_phase_order()
