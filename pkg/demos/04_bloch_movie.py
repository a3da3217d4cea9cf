"""Export Bloch-ellipsoid frames for the three presets as JSON and SVG.

Run: python demos/04_bloch_movie.py [output-dir]

A qubit channel maps the Bloch sphere to an ellipsoid r -> M r + v.  The
frames show amplitude damping shrinking the sphere onto the |0> pole,
depolarization shrinking it onto the origin (faster along z), and the driven
variant leaving an ellipsoid elongated along the drive axis x.
"""

import sys
from pathlib import Path

from lindrecon import PRESETS, get_preset
from lindrecon.io import bloch_frame, dumps, frames_to_dict
from lindrecon.svg import frame_svg

out = Path(sys.argv[1] if len(sys.argv) > 1 else "bloch_frames")
out.mkdir(parents=True, exist_ok=True)

for name in PRESETS:
    preset = get_preset(name)
    frames = [bloch_frame(preset.generator, t) for t in (0.0, *preset.snapshot_times)]
    (out / f"{name}.json").write_text(dumps(frames_to_dict(frames, name)))
    for n, frame in enumerate(frames):
        (out / f"{name}_frame{n:03d}.svg").write_text(frame_svg(frame))
    summary = ", ".join(
        f"t={f['time']:g}: axes {[round(s, 3) for s in f['semi_axes']]} center {[round(c, 3) for c in f['center']]}"
        for f in frames
    )
    print(f"{name}: {summary}")
print(f"wrote frames to {out}/")
