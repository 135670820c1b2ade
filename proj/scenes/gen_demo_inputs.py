"""Writes mini_level.inputs.jsonl, a scripted 5000-tick play-through of mini_level.json."""
import json
import random

TICKS = 5000
rng = random.Random(7)

events = {
    40: [{"kind": "fire"}],
    300: [{"kind": "preview", "node": 11, "candidates": [{"xw": 0.5}, {"xw": 1.0}, {"yw": 0.8}]}],
    320: [{"kind": "manipulate", "node": 11, "rotation": {"xw": 0.5}}],
    900: [{"kind": "toggle_projection"}],
    1150: [{"kind": "toggle_projection"}],
    1600: [{"kind": "fire", "projectile": "straight"}],
    2400: [{"kind": "blast"}],
    2800: [{"kind": "wireframe"}],
    3300: [{"kind": "fire"}],
    4200: [{"kind": "manipulate", "node": 11, "rotation": {"yw": -0.4}}],
}

segments = []
tick = 1
while tick <= TICKS:
    length = rng.randint(20, 120)
    keys = rng.choice([[], ["W"], ["W", "D"], ["W", "A"], ["S"], ["A"], ["D"], ["E"], ["Q"], ["W", "E"], ["Z"], ["X"]])
    turn = rng.uniform(-6, 6)
    segments.append((tick, min(TICKS, tick + length - 1), keys, turn))
    tick += length

with open("mini_level.inputs.jsonl", "w") as out:
    for start, end, keys, turn in segments:
        for t in range(start, end + 1):
            msg = {"type": "input", "tick": t}
            if keys:
                msg["keys"] = keys
            if turn:
                msg["mouse_dx"] = round(turn, 3)
            if t in events:
                msg["actions"] = events[t]
            out.write(json.dumps(msg, separators=(",", ":")) + "\n")
