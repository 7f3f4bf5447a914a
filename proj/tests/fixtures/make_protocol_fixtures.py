#!/usr/bin/env python3
# Copyright (C) 2026 The sketchguide Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes backend wire-protocol fixture frames.

This encoder is written from the frame layout alone and shares no code with
the C++ implementation. Every tensor value is a small dyadic rational, so it
is exact in float32 and in the decimal manifest.

    python3 tests/fixtures/make_protocol_fixtures.py tests/fixtures/protocol
"""

import json
import pathlib
import struct
import sys


def ramp(count, step=0.125, start=-1.0):
    return [start + step * i for i in range(count)]


def tensor(shape, values):
    n = 1
    for d in shape:
        n *= d
    assert len(values) == n, (shape, len(values))
    return {"shape": list(shape), "data": list(values)}


def encode(header, tensors):
    full = dict(header)
    full["shapes"] = [t["shape"] for t in tensors]
    full["dtype"] = "f32"
    text = json.dumps(full, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    body = b"".join(struct.pack("<%df" % len(t["data"]), *t["data"]) for t in tensors)
    payload = text + b"\n" + body
    return struct.pack("<I", len(payload)) + payload


def cases():
    yield "encode_prompt_request", {"op": "encode_prompt", "request_id": 1, "text": "a cat on a hill, 水彩",
                                    "style": "anime"}, []
    yield "encode_prompt_response", {"op": "encode_prompt", "request_id": 1}, [tensor([2, 3], ramp(6))]
    yield "vae_encode_request", {"op": "vae_encode", "request_id": 2}, [tensor([2, 2, 3], ramp(12, 1 / 16, 0.0))]
    yield "vae_encode_response", {"op": "vae_encode", "request_id": 2}, [tensor([4, 1, 2], ramp(8, 0.25, -1.0))]
    yield "vae_decode_request", {"op": "vae_decode", "request_id": 3}, [tensor([4, 2, 1], ramp(8, 0.5, -2.0))]
    yield "predict_noise_request", {"op": "predict_noise", "request_id": 4, "timesteps": [800, 800, 600],
                                    "embed_index": [0, 1, 0]}, [
        tensor([4, 1, 1], [0.5, -0.5, 1.5, 2.0]),
        tensor([4, 1, 1], [0.25, 0.0, -0.75, 1.0]),
        tensor([4, 1, 1], [-3.0, 0.125, 0.0625, 4.0]),
        tensor([1, 2], [0.5, -0.25]),
        tensor([1, 2], [0.0, 0.75]),
    ]
    yield "predict_noise_response", {"op": "predict_noise", "request_id": 4}, [
        tensor([4, 1, 1], ramp(4, 0.5)),
        tensor([4, 1, 1], ramp(4, 0.25)),
        tensor([4, 1, 1], ramp(4, 0.125)),
    ]
    yield "extract_lines_request", {"op": "extract_lines", "request_id": 5}, [tensor([1, 2, 3], ramp(6, 0.125, 0.25))]
    yield "extract_lines_response", {"op": "extract_lines", "request_id": 5}, [tensor([1, 2], [1.0, 0.0])]
    yield "error_response", {"op": "vae_decode", "request_id": 3, "error": "latent must have 4 channels"}, []


def main(argv):
    out = pathlib.Path(argv[1] if len(argv) > 1 else "protocol")
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for name, header, tensors in cases():
        (out / (name + ".bin")).write_bytes(encode(header, tensors))
        manifest.append({"name": name, "header": header, "tensors": tensors})
    text = json.dumps(manifest, indent=1, ensure_ascii=False) + "\n"
    (out / "manifest.json").write_text(text, encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
