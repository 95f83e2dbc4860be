"""Detection: recompute the chunk chain at each offset and verify.

Detection needs only the public key, the hash salts, and the layout
parameters. At a candidate offset the first ell chars are read as the
message block and each following block's chained hash h_bit(m || x ||
c_prev) is recomputed; the concatenated values are unmasked with
h_mask(msg), decoded by the error-correcting code, and the recovered
signature is checked against h_sign(msg). Any planted block contributes
a wrong chunk, which is exactly what the decoder's error budget absorbs.

A forged text would need a valid signature on its own message block, so
false positives reduce to signature forgery (or a hash collision on the
decode side, bounded by the code's minimum distance).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional

from . import crypto, ecc
from .core import FORMAT_VERSION, BitString, WatermarkParams
from .crypto import KeyMaterial, OracleSuite


@dataclass(frozen=True)
class DetectionResult:
    """Verdict for one text (or one gadget within it)."""

    detected: bool
    offset: Optional[int] = None
    corrected_errors: int = 0
    recovered_sig: Optional[BitString] = None
    message_block: Optional[str] = None

    def to_json_dict(self) -> dict:
        sig = None
        if self.recovered_sig is not None:
            sig = {
                "hex": self.recovered_sig.to_bytes().hex(),
                "bits": self.recovered_sig.length,
            }
        return {
            "format_version": FORMAT_VERSION,
            "detected": self.detected,
            "offset": self.offset,
            "corrected_errors": self.corrected_errors,
            "recovered_sig": sig,
            "message_block": self.message_block,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


_NOT_DETECTED = DetectionResult(detected=False)


def _try_offset(
    text: str,
    offset: int,
    params: WatermarkParams,
    profile: ecc.EccProfile,
    keys: KeyMaterial,
    suite: OracleSuite,
) -> Optional[DetectionResult]:
    """Attempt full recovery of a gadget starting at a character offset."""
    ell = params.ell
    beta = params.beta
    bit_oracle = suite.bit_oracle()

    msg_window = text[offset : offset + ell]
    m_acc = bytearray()
    c_val = 0
    c_len = 0
    for j in range(1, params.n_blocks + 1):
        window_bytes = text[offset + j * ell : offset + (j + 1) * ell].encode("utf-8")
        if c_len:
            pad = (-c_len) % 8
            c_bytes = (c_val << pad).to_bytes((c_len + pad) // 8, "big")
        else:
            c_bytes = b""
        achieved = bit_oracle.bit_value(bytes(m_acc) + window_bytes + c_bytes, beta)
        m_acc += window_bytes
        c_val = (c_val << beta) | achieved
        c_len += beta

    received = BitString(c_val, c_len)
    msg_bytes = msg_window.encode("utf-8")
    codeword = suite.h_mask(msg_bytes, params.lambda_c) ^ received
    sigma = ecc.decode(codeword, profile)
    if sigma is None:
        return None
    if not crypto.verify(keys, suite.h_sign(msg_bytes), sigma):
        return None
    corrected = ecc.symbol_distance(codeword, ecc.encode(sigma, profile))
    return DetectionResult(
        detected=True,
        offset=offset,
        corrected_errors=corrected,
        recovered_sig=sigma,
        message_block=msg_window,
    )


def _candidate_offsets(text: str, gadget_len: int) -> Iterable[int]:
    return range(0, len(text) - gadget_len + 1)


def detect(
    keys: KeyMaterial,
    params: WatermarkParams,
    text: str,
    *,
    suite: OracleSuite = OracleSuite(),
    known_offset: Optional[int] = None,
) -> DetectionResult:
    """Scan every offset (or probe just one) for an embedded signature.

    With known_offset the scan collapses to a single recovery attempt.
    Otherwise offsets 0..len(text)-gadget_chars are tried in order and the
    lowest verifying one wins. Total: bad input means not detected.
    """
    profile = ecc.EccProfile.for_params(params)
    gadget_len = params.gadget_chars
    if len(text) < gadget_len:
        return _NOT_DETECTED
    if known_offset is not None:
        if known_offset < 0 or known_offset > len(text) - gadget_len:
            return _NOT_DETECTED
        offsets: Iterable[int] = (known_offset,)
    else:
        offsets = _candidate_offsets(text, gadget_len)
    for offset in offsets:
        result = _try_offset(text, offset, params, profile, keys, suite)
        if result is not None:
            return result
    return _NOT_DETECTED


def detect_all(
    keys: KeyMaterial,
    params: WatermarkParams,
    text: str,
    *,
    suite: OracleSuite = OracleSuite(),
) -> list[DetectionResult]:
    """Find every gadget, including tiled ones that share a message block.

    After a hit the scan resumes at offset + gadget_chars - ell so a
    following gadget whose message block is the previous gadget's final
    window is still seen; non-overlapping gadgets are a fortiori covered.
    """
    profile = ecc.EccProfile.for_params(params)
    gadget_len = params.gadget_chars
    results: list[DetectionResult] = []
    offset = 0
    while offset <= len(text) - gadget_len:
        result = _try_offset(text, offset, params, profile, keys, suite)
        if result is not None:
            results.append(result)
            offset += gadget_len - params.ell
        else:
            offset += 1
    return results
