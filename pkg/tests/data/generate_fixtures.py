"""
Regenerate the MOT toy sequence under `mot/MOT-toy`

Track 1 (pedestrian) walks right, track 2 (car) drives right, track 3 is a
pedestrian below 1/32 of the frame width and gets filtered out; the single
row of track 4 has consider-flag 0. SOT sequences are generated at test
time, see `fixtures_data.write_sot_sequence`.
"""
from pathlib import Path

root = Path(__file__).parent / "mot" / "MOT-toy"
(root / "gt").mkdir(parents=True, exist_ok=True)

rows = []
for f in range(1, 13):
    rows.append(f"{f},1,{10 + 5 * (f - 1)},100,40,120,1,1,1.0")
    rows.append(f"{f},2,{300 + 10 * (f - 1)},250,120,60,1,3,1.0")
    rows.append(f"{f},3,{500 - 2 * (f - 1)},40,10,12,1,1,0.8")
rows.append("1,4,600,400,30,30,0,8,0.0")
(root / "gt" / "gt.txt").write_text("\n".join(rows) + "\n")
