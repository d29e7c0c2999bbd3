"""
Absorbing a 1D wave with two Laguerre layers
============================================

A Gaussian in u splits into two pulses that leave the interval [-2.5, 2.5].
With a semi-infinite element on each side plus a sigmoid sponge, almost
nothing comes back. With reflecting walls the pulses return at full size.
Last, the same absorption is timed against an extended finite mesh.
"""
import dataclasses
import tempfile
from pathlib import Path

import numpy as np

from laguerre_sem.cases import build_case
from laguerre_sem.cli import bench
from laguerre_sem.config import default_config, merge_config
from laguerre_sem.diagnostics import reflection_metric
from laguerre_sem.equations import BoundaryConditions

setup = build_case(default_config("wave1d"))
print("layer end points:", setup.meta["layer_end"])
res = setup.run()
print(f"peak |u| left in the domain at t = {res.t:.1f}:",
      f"{reflection_metric(res.q[0], setup.q_init[0], setup.finite_nodes):.2e}")

# Same mesh, no layer, v = 0 at both ends. The pulses meet again at t = 10.
sealed = build_case(merge_config({"layer": {"enabled": False}, "damping": {"enabled": False},
                                  "integrator": {"t_end": 10.0}}, "wave1d"))
x = sealed.mesh.coords[:, 0]
walls = [int(np.argmin(x)), int(np.argmax(x))]
sealed = dataclasses.replace(sealed, bc=BoundaryConditions().add(BoundaryConditions.dirichlet(walls, 1, lambda t: 0.0)))
res = sealed.run()
print(f"with reflecting walls at t = {res.t:.1f}:",
      f"{reflection_metric(res.q[0], sealed.q_init[0], sealed.finite_nodes):.3f}")

# Cost: the extended mesh needs finite elements all the way to the layer end.
end = max(abs(v) for v in setup.meta["layer_end"].values())
with tempfile.TemporaryDirectory() as tmp:
    path = bench([default_config("wave1d"), merge_config({"mesh": {"extend_to": end}}, "wave1d")],
                 Path(tmp), nsteps=1000, repeats=3)
    print()
    print(path.read_text())
