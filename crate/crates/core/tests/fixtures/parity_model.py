#!/usr/bin/env python3
"""Test model speaking the line-delimited JSON protocol: class = features[0] mod 2."""
import json
import sys

for line in sys.stdin:
    req = json.loads(line)
    if req["op"] == "hello":
        print(json.dumps({"ok": True, "classes": 2}), flush=True)
    elif req["op"] == "predict":
        print(json.dumps({"class": req["features"][0] % 2}), flush=True)
    else:
        print(json.dumps({"error": "bad op"}), flush=True)
