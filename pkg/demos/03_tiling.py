#!/usr/bin/env python3
"""Tiling: consecutive gadgets share a block, saving ell chars per extra gadget."""

from pdws import (
    ModelHandle,
    OracleSuite,
    WatermarkParams,
    detect_all,
    keygen,
    tile_compress,
    watermark,
)

keys = keygen(b"demo-tiling")
suite = OracleSuite(b"demo-sign", b"demo-mask", b"demo-bit")
params = WatermarkParams(a_max=64)
model = ModelHandle(kind="uniform-mock")

k = 3
tiled = tile_compress(params, keys, model, "", k_pairs=k, seed=11, suite=suite)
standalone = k * params.gadget_chars
print("3 standalone gadgets: %d chars" % standalone)
print("3 tiled gadgets:      %d chars (saved %d)" % (len(tiled), standalone - len(tiled)))

hits = detect_all(keys, params, tiled, suite=suite)
print("gadgets found at offsets:", [h.offset for h in hits])

# each message block after the first is the previous signature region's
# final window, so the stride between offsets is gadget_chars - ell
stride = params.gadget_chars - params.ell
assert [h.offset for h in hits] == [0, stride, 2 * stride]

# detect_all also picks up independent gadgets scattered through a document
a, _ = watermark(params, keys, model, "", seed=12, suite=suite)
b, _ = watermark(params, keys, model, "", seed=13, suite=suite)
doc = a + "and some connecting prose in between " + b
print(
    "two separate gadgets:", [h.offset for h in detect_all(keys, params, doc, suite=suite)]
)
