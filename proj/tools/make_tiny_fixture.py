#!/usr/bin/env python3
"""Regenerate the committed tiny U-Net fixture used by the C++ tests.

Writes, into tests/fixtures/:
  tiny_unet.unetw         UNETW1 weights, base width 4 (same layer table as the
                          full network, every filter count divided by 8)
  tiny_golden.prob.f32    sigmoid output of that network on the analytic input
  tiny_golden.prob.json   sidecar for the above

The golden map is computed with PyTorch in float64, independently of the C++
kernels. The input stack is defined by integer arithmetic so both sides build
bit-identical float32 values:

  x[c, y, x] = ((c * 131 + y * 17 + x * 29 + (x * y) % 23) % 97) / 96

Usage: python3 tools/make_tiny_fixture.py [--out tests/fixtures]
"""

import argparse
import json
import pathlib
import struct

import numpy as np
import torch
import torch.nn.functional as F

MAGIC = b"UNETW1\0"
IN_CHANNELS = 5
BASE = 4
DEPTH = 4
SIZE = 128
SEED = 20180718


def layer_table(base=BASE, depth=DEPTH, in_channels=IN_CHANNELS):
    layers = []
    cin = in_channels
    for i in range(1, depth + 1):
        f = base << (i - 1)
        layers.append((f"enc{i}.conv1", (f, cin, 3, 3), (f,)))
        layers.append((f"enc{i}.conv2", (f, f, 3, 3), (f,)))
        cin = f
    bottom = base << depth
    layers.append(("bottleneck.conv1", (bottom, cin, 3, 3), (bottom,)))
    layers.append(("bottleneck.conv2", (bottom, bottom, 3, 3), (bottom,)))
    cin = bottom
    for i in range(depth, 0, -1):
        f = base << (i - 1)
        layers.append((f"dec{i}.up", (cin, f, 2, 2), (f,)))
        layers.append((f"dec{i}.conv1", (f, 2 * f, 3, 3), (f,)))
        layers.append((f"dec{i}.conv2", (f, f, 3, 3), (f,)))
        cin = f
    layers.append(("head", (1, cin, 1, 1), (1,)))
    return layers


def make_weights(rng):
    tensors = []
    for name, wshape, bshape in layer_table():
        if name.endswith(".up"):
            fan_in = wshape[0]
        else:
            fan_in = wshape[1] * wshape[2] * wshape[3]
        w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=wshape).astype(np.float32)
        b = rng.normal(0.0, 0.05, size=bshape).astype(np.float32)
        tensors.append((name + ".weight", w))
        tensors.append((name + ".bias", b))
    return tensors


def write_unetw(path, tensors):
    manifest = []
    blob = bytearray()
    for name, arr in tensors:
        raw = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        manifest.append({"byte_len": len(raw), "dtype": "f32", "name": name,
                         "offset": len(blob), "shape": list(arr.shape)})
        blob += raw
    text = json.dumps(manifest, separators=(",", ":"), sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(text)))
        f.write(text)
        f.write(blob)


def analytic_input():
    c, y, x = np.meshgrid(np.arange(IN_CHANNELS), np.arange(SIZE), np.arange(SIZE), indexing="ij")
    v = (c * 131 + y * 17 + x * 29 + (x * y) % 23) % 97
    return (v / 96.0).astype(np.float32)


def forward(tensors, x):
    w = {name: torch.from_numpy(arr).double() for name, arr in tensors}
    t = torch.from_numpy(x).double().unsqueeze(0)

    def block(t, stage):
        t = F.relu(F.conv2d(t, w[stage + ".conv1.weight"], w[stage + ".conv1.bias"], padding=1))
        return F.relu(F.conv2d(t, w[stage + ".conv2.weight"], w[stage + ".conv2.bias"], padding=1))

    skips = []
    for i in range(1, DEPTH + 1):
        t = block(t, f"enc{i}")
        skips.append(t)
        t = F.max_pool2d(t, 2)
    t = block(t, "bottleneck")
    for i in range(DEPTH, 0, -1):
        t = F.conv_transpose2d(t, w[f"dec{i}.up.weight"], w[f"dec{i}.up.bias"], stride=2)
        t = block(torch.cat([t, skips[i - 1]], dim=1), f"dec{i}")
    t = F.conv2d(t, w["head.weight"], w["head.bias"])
    return torch.sigmoid(t)[0, 0].numpy()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(SEED)
    tensors = make_weights(rng)
    write_unetw(out / "tiny_unet.unetw", tensors)

    prob = forward(tensors, analytic_input())
    prob.astype("<f4").tofile(out / "tiny_golden.prob.f32")
    side = {"width": SIZE, "height": SIZE, "planes": 1, "order": ["probability"], "dtype": "f32",
            "byte_order": "little", "source_width": SIZE, "source_height": SIZE}
    (out / "tiny_golden.prob.json").write_text(json.dumps(side, indent=2) + "\n")
    print(f"golden range [{prob.min():.6f}, {prob.max():.6f}], mean {prob.mean():.6f}")


if __name__ == "__main__":
    main()
