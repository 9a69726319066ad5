"""Gateway emulation: sequence and checksum frame records, then push them.

Each record travels in an envelope::

    {"device_id": "auv-01", "sequence_number": 1, "payload": {...FrameRecord...},
     "checksum": "1c291ca3"}

``checksum`` is the CRC-32 (lowercase hex, 8 digits) of the payload encoded
as compact JSON with sorted keys, UTF-8. Delivery is at-least-once: every
envelope is retried after 1 s, 2 s and 4 s before it is reported failed.
"""
import json
import logging
import time
import urllib.error
import urllib.request
import zlib
from dataclasses import dataclass, field

from ..errors import ValidationError

log = logging.getLogger(__name__)

BACKOFF_S = (1.0, 2.0, 4.0)
RETRYABLE_STATUS = {408, 425, 429}


def canonical_bytes(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def crc32_hex(payload):
    return f"{zlib.crc32(canonical_bytes(payload)) & 0xFFFFFFFF:08x}"


@dataclass(frozen=True)
class TelemetryEnvelope:
    device_id: str
    sequence_number: int
    payload: dict
    checksum: str

    @classmethod
    def wrap(cls, record, device_id, sequence_number):
        payload = record.to_dict() if hasattr(record, "to_dict") else dict(record)
        return cls(device_id, sequence_number, payload, crc32_hex(payload))

    def verify(self):
        return crc32_hex(self.payload) == self.checksum

    def to_dict(self):
        return {"device_id": self.device_id, "sequence_number": self.sequence_number,
                "payload": self.payload, "checksum": self.checksum}

    def to_json(self):
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_dict(cls, d):
        env = cls(d["device_id"], int(d["sequence_number"]), d["payload"], d["checksum"])
        if not env.verify():
            raise ValidationError(f"checksum mismatch on envelope {env.sequence_number}")
        return env


def make_envelopes(records, device_id, start=1):
    return [TelemetryEnvelope.wrap(rec, device_id, start + i) for i, rec in enumerate(records)]


@dataclass
class DeliveryStatus:
    sequence_number: int
    frame_id: str
    status: str = "pending"
    attempts: int = 0
    detail: str = ""


@dataclass
class DeliveryReport:
    endpoint: str
    mode: str
    entries: list = field(default_factory=list)

    @property
    def ok(self):
        return all(e.status == "delivered" for e in self.entries)

    @property
    def failed(self):
        return [e for e in self.entries if e.status != "delivered"]

    def to_dict(self):
        return {
            "endpoint": self.endpoint,
            "mode": self.mode,
            "delivered": sum(e.status == "delivered" for e in self.entries),
            "failed": len(self.failed),
            "entries": [vars(e) for e in self.entries],
        }


class _Retry(Exception):
    pass


def _post(url, body, timeout):
    req = urllib.request.Request(url, data=body, method="POST",
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            return f"HTTP {resp.status}"
    except urllib.error.HTTPError as exc:
        if exc.code >= 500 or exc.code in RETRYABLE_STATUS:
            raise _Retry(f"HTTP {exc.code}") from None
        raise ValueError(f"HTTP {exc.code}") from None
    except (urllib.error.URLError, OSError) as exc:
        raise _Retry(str(getattr(exc, "reason", exc))) from None


def _append(path, line):
    try:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
    except OSError as exc:
        raise _Retry(str(exc)) from None
    return "appended"


def push_telemetry(records, endpoint, mode="http", device_id="auv-01", start_sequence=1,
                   backoff=BACKOFF_S, sleep=time.sleep, timeout=10.0):
    """Send one envelope per record, in order; returns a :class:`DeliveryReport`.

    ``endpoint`` is a URL in ``http`` mode and a sink file path in ``file``
    mode. A retryable failure (5xx, 408/425/429, connection error, I/O
    error) is retried once per entry of ``backoff``.
    """
    if mode not in ("http", "file"):
        raise ValueError("mode must be 'http' or 'file'")
    if not endpoint:
        raise ValidationError("no telemetry endpoint configured")
    report = DeliveryReport(str(endpoint), mode)
    for env in make_envelopes(records, device_id, start_sequence):
        status = DeliveryStatus(env.sequence_number, env.payload.get("frame_id"))
        report.entries.append(status)
        body = env.to_json()
        delays = list(backoff)
        while True:
            status.attempts += 1
            try:
                if mode == "http":
                    status.detail = _post(endpoint, body.encode("utf-8"), timeout)
                else:
                    status.detail = _append(endpoint, body)
                status.status = "delivered"
                break
            except _Retry as exc:
                status.detail = str(exc)
                if not delays:
                    status.status = "failed"
                    break
                wait = delays.pop(0)
                log.info("envelope %d attempt %d failed (%s); retrying in %gs",
                         env.sequence_number, status.attempts, exc, wait)
                sleep(wait)
            except ValueError as exc:
                status.detail = str(exc)
                status.status = "failed"
                break
    return report
