"""Writes data/catalog.json: 107 pedestrian and 19 vehicle archetypes."""
import json
import random
import sys

rng = random.Random(2024)

pedestrians = [
    {"id": f"ped_{i:03d}", "walk_speed": round(rng.uniform(1.0, 1.8), 3), "radius": round(rng.uniform(0.25, 0.4), 3)}
    for i in range(107)
]
cyclists = [
    {"id": f"cyc_{i:02d}", "speed": round(rng.uniform(3.5, 5.0), 3), "radius": round(rng.uniform(0.35, 0.5), 3)}
    for i in range(4)
]
vehicles = []
for i in range(19):
    slow = i % 5 == 4
    vehicles.append({
        "id": f"car_{i:02d}",
        "length": round(rng.uniform(3.5, 6.0), 3),
        "max_speed": round(rng.uniform(5.0, 6.0) if slow else rng.uniform(12.0, 16.0), 3),
        "accel": round(rng.uniform(1.5, 3.0), 3),
        "decel": round(rng.uniform(4.0, 6.0), 3),
    })
trams = [{"id": "tram_std", "length": 30.0, "max_speed": 14.0, "dwell": 25.0}]

out = sys.argv[1] if len(sys.argv) > 1 else "data/catalog.json"
with open(out, "w") as f:
    json.dump({"pedestrians": pedestrians, "cyclists": cyclists, "vehicles": vehicles, "trams": trams}, f, indent=1)
