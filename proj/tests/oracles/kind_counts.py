"""Counts feature kinds in a site file by scanning the raw text, without a JSON parser."""
import re
import sys
from collections import Counter

path = sys.argv[1] if len(sys.argv) > 1 else "data/durlacher-tor-mini.site.json"
text = open(path, encoding="utf-8").read()
counts = Counter(re.findall(r'"kind"\s*:\s*"([a-z_]+)"', text))
for kind in sorted(counts):
    print(f"{kind} {counts[kind]}")
print(f"total {sum(counts.values())}")
