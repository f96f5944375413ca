"""Independent canonical serializer and FNV-1a 64 for a freshly initialised world.

Layout (every value a little-endian int64; reals in micrometres, round half to
even; strings as length followed by bytes): tick, next_agent_id, agent count,
avatar (level, x, y, heading, speed_cap, rot_latch, in_transit), signal count
and (id, colour) sorted by id, tour target, phase count and (phase, cued) per
barrier, completed, completion_emitted, tram cursor count and next_run per
cursor, animation flag, mutation count.
"""
import json
import struct
import sys

data = sys.argv[1] if len(sys.argv) > 1 else "data"
site = json.load(open(f"{data}/durlacher-tor-mini.site.json", encoding="utf-8"))
tour = json.load(open(f"{data}/tour.json", encoding="utf-8"))
schedule = json.load(open(f"{data}/schedule.json", encoding="utf-8"))

out = bytearray()


def put_int(v):
    out.extend(struct.pack("<q", v))


def put_real(v):
    put_int(round(v * 1e6))  # Python round() is half-to-even


def put_str(s):
    b = s.encode("utf-8")
    put_int(len(b))
    out.extend(b)


def colour_at(program, t):
    cycle = sum(d for _, d in program["phases"])
    u = (t + program.get("offset", 0)) % cycle
    for colour, d in program["phases"]:
        if u < d:
            return colour
        u -= d
    return program["phases"][-1][0]


put_int(0)  # tick
put_int(1)  # next agent id
put_int(0)  # agents
start = tour["start_pose"]
put_int(start["level"])
put_real(start["position"][0])
put_real(start["position"][1])
put_int(start["heading"] % 360)
put_real(1.4)
put_int(0)
put_int(0)
heads = sorted((f["id"], f["props"]["program"]) for f in site["features"] if f["kind"] == "signal_head")
put_int(len(heads))
for hid, program in heads:
    put_str(hid)
    put_int({"green": 0, "yellow": 1, "red": 2}[colour_at(program, 0.0)])
put_int(0)
put_int(len(tour["barriers"]))
for _ in tour["barriers"]:
    put_int(0)
    put_int(0)
put_int(0)
put_int(0)
cursors = sum(len(line["offsets"]) for line in schedule["lines"])
put_int(cursors)
for _ in range(cursors):
    put_int(0)
put_int(0)  # animation
put_int(0)  # mutations

h = 0xCBF29CE484222325
for byte in out:
    h ^= byte
    h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
print(f"bytes {len(out)}")
print(f"hash {h:016x}")
