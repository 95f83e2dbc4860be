#!/usr/bin/env python3
"""What survives editing: framing survives, cutting into the gadget does not."""

import random

from pdws import ModelHandle, OracleSuite, WatermarkParams, detect, keygen, watermark

keys = keygen(b"demo-robustness")
suite = OracleSuite(b"demo-sign", b"demo-mask", b"demo-bit")
params = WatermarkParams(a_max=64)
model = ModelHandle(kind="uniform-mock")

text, _ = watermark(params, keys, model, "", seed=7, suite=suite)
rnd = random.Random(7)
alphabet = "abcdefghijklmnopqrstuvwxyz "


def junk(k):
    return "".join(rnd.choice(alphabet) for _ in range(k))


# surrounding the gadget with unrelated text just shifts the offset
framed = junk(37) + text + junk(120)
hit = detect(keys, params, framed, suite=suite)
print("prefix+suffix: detected=%s offset=%d (expected 37)" % (hit.detected, hit.offset))

# cutting anywhere inside the gadget removes part of the chain
truncated = text[:  params.gadget_chars - 300]
print("truncated:     detected=%s" % detect(keys, params, truncated, suite=suite).detected)

# one flipped character early in the signature region reshuffles every
# later chunk, far beyond what the code can correct
pos = params.ell + 5
corrupted = text[:pos] + ("A" if text[pos] != "A" else "B") + text[pos + 1 :]
print("early flip:    detected=%s" % detect(keys, params, corrupted, suite=suite).detected)

# the same flip in the final block damages only the last chunk, which the
# error-correcting code absorbs
tail = text[:-1] + ("A" if text[-1] != "A" else "B")
hit = detect(keys, params, tail, suite=suite)
print(
    "tail flip:     detected=%s corrected_errors=%d" % (hit.detected, hit.corrected_errors)
)
