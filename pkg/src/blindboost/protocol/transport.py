"""Transports: an in-process duplex queue and a byte-framed stream socket.

Both expose send(phase, payload) / recv() and log every message into a shared
Transcript. The protocol is strict ping-pong, so the transcript order is
deterministic for either transport.
"""

import queue
import socket
import struct
import threading

from ..errors import TransportClosed
from .transcript import BYTE_PHASE, PHASE_BYTE, Transcript

_CLOSED = object()


class _QueueEndpoint:
    def __init__(self, name: str, outbox, inbox, transcript, lock):
        self.name = name
        self._outbox = outbox
        self._inbox = inbox
        self._transcript = transcript
        self._lock = lock
        self._closed = False

    def send(self, phase: str, payload: bytes = b""):
        if self._closed:
            raise TransportClosed("endpoint closed")
        with self._lock:
            self._transcript.record(self.name, phase, payload)
        self._outbox.put((phase, payload))

    def recv(self):
        item = self._inbox.get()
        if item is _CLOSED:
            raise TransportClosed("peer closed the channel")
        return item

    def close(self):
        self._closed = True
        self._outbox.put(_CLOSED)


def memory_pair(transcript: Transcript | None = None):
    """(cloud_end, csp_end, transcript) connected by in-process queues."""
    transcript = transcript if transcript is not None else Transcript()
    lock = threading.Lock()
    a2b, b2a = queue.Queue(), queue.Queue()
    cloud = _QueueEndpoint("cloud->csp", a2b, b2a, transcript, lock)
    csp = _QueueEndpoint("csp->cloud", b2a, a2b, transcript, lock)
    return cloud, csp, transcript


class _SocketEndpoint:
    """Frames messages as [phase: 1][length: 4 big-endian][payload]."""

    def __init__(self, name: str, sock: socket.socket, transcript, lock):
        self.name = name
        self._sock = sock
        self._transcript = transcript
        self._lock = lock

    def send(self, phase: str, payload: bytes = b""):
        header = struct.pack(">BI", PHASE_BYTE[phase], len(payload))
        with self._lock:
            self._transcript.record(self.name, phase, payload)
        try:
            self._sock.sendall(header + payload)
        except OSError as exc:
            raise TransportClosed(str(exc)) from exc

    def _read_exact(self, count: int) -> bytes:
        chunks = []
        while count:
            chunk = self._sock.recv(count)
            if not chunk:
                raise TransportClosed("socket closed mid-message")
            chunks.append(chunk)
            count -= len(chunk)
        return b"".join(chunks)

    def recv(self):
        header = self._read_exact(5)
        phase_byte, length = struct.unpack(">BI", header)
        payload = self._read_exact(length) if length else b""
        return BYTE_PHASE[phase_byte], payload

    def close(self):
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


def socket_pair(transcript: Transcript | None = None):
    """(cloud_end, csp_end, transcript) over a local stream socket pair."""
    transcript = transcript if transcript is not None else Transcript()
    lock = threading.Lock()
    s1, s2 = socket.socketpair()
    cloud = _SocketEndpoint("cloud->csp", s1, transcript, lock)
    csp = _SocketEndpoint("csp->cloud", s2, transcript, lock)
    return cloud, csp, transcript
