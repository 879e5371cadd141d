"""Sliding dynamics of the visible-fold normal form.

The orbit dropped from (-0.8, 0.1) reaches the switching line inside the
sliding region, creeps right under the Filippov drift 1/(1-2x), leaves at
the fold along the unstable pseudo-separatrix and crosses the outer section
at +1/2 -- the constant value of the unregularized return map.
"""

from slidekick.fields import classify_point, filippov_flow, find_fold, sliding_field
from slidekick.integrator import Section
from slidekick.models import model

nf = model("normal-fold")

print("region classes on the switching line:")
for x in (-0.6, -0.1, 0.0, 0.4):
    print(f"  x = {x:+.1f}: {classify_point(nf.system, x).value}")

print(f"\nsliding drift at x = -0.25: {sliding_field(nf.system, -0.25):.6f}  (= 2/3)")
print(f"fold: {find_fold(nf.system, (-1, 1))}")

traj = filippov_flow(nf.system, (-0.8, 0.1), Section(0.25, "x>0", id="out"))
print("\nevents along the orbit from (-0.8, 0.1):")
for ev in traj.events:
    print(f"  t = {ev.t:8.4f}  {ev.kind:<22} at ({ev.location[0]:+.6f}, {ev.location[1]:+.6f})")
print(f"final point: ({traj.end[1]:.10f}, {traj.end[2]:.6f})   [x0+ = 0.5]")
