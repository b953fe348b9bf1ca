"""Look inside the discriminator: statistics, thresholds, and the three rules.

Seen instances project close to an embedding of the right norm, so both
their length gap and their minimum distance to the seen table stay small.
Unseen instances were never part of the regression, so the mapper sends
them somewhere with the wrong norm and far from every seen embedding.
The thresholds are simply mean + population std of the seen statistics.
"""

import numpy as np

from sdgzsl import (
    GateStatistics,
    SyntheticSpec,
    TrainConfig,
    calibrate,
    gate_dl,
    gate_ol,
    gate_ws,
    generate_synthetic,
    length_gap,
    min_semantic_distance,
    train,
)
from sdgzsl.mlp import forward_batch

ds = generate_synthetic(SyntheticSpec(10, 3, 32, 16, 50, 20, 0.05, seed=7))
params, _ = train(ds, TrainConfig())


def stats_for(xs):
    proj = forward_batch(params, xs)
    d_l = np.abs(np.sqrt((proj**2).sum(axis=1)) - ds.unified_norm)
    msd = np.array([min_semantic_distance(p, ds.seen_emb) for p in proj])
    return d_l, msd


seen_dl, seen_msd = stats_for(ds.seen_test_x)
unseen_dl, unseen_msd = stats_for(ds.unseen_test_x)

print("== statistic separation (test splits) ==")
print(f"seen   d_l: mean={seen_dl.mean():.4f}  p95={np.percentile(seen_dl, 95):.4f}")
print(f"unseen d_l: mean={unseen_dl.mean():.4f}  p5 ={np.percentile(unseen_dl, 5):.4f}")
print(f"seen   msd: mean={seen_msd.mean():.4f}  p95={np.percentile(seen_msd, 95):.4f}")
print(f"unseen msd: mean={unseen_msd.mean():.4f}  p5 ={np.percentile(unseen_msd, 5):.4f}")

th = calibrate(params, ds, lam=1.0)
print("\n== calibrated thresholds (mean + pop-std of seen TRAIN statistics) ==")
print(f"r_ol = {th.m_dl:.4f} + {th.std_dl:.4f} = {th.r_ol:.4f}")
print(f"r_0  = {th.m_msd:.4f} + 2*{th.std_msd:.4f} = {th.r_0:.4f}")
print(f"r_1  = {th.m_msd:.4f} + {th.std_msd:.4f} = {th.r_1:.4f}")
print(f"r_ws = {th.m_ws:.4f} + {th.std_ws:.4f} = {th.r_ws:.4f}   (lambda = {th.lam})")

print("\n== the three rules on a few instances ==")
print(f"{'instance':<14} {'d_l':>7} {'msd':>7}   ol      dl      ws")
rows = [("seen/" + str(int(y)), d, m)
        for y, d, m in zip(ds.seen_test_y[:4], seen_dl[:4], seen_msd[:4])]
rows += [("unseen/" + str(int(y)), d, m)
         for y, d, m in zip(ds.unseen_test_y[:4], unseen_dl[:4], unseen_msd[:4])]
for name, d, m in rows:
    s = GateStatistics(float(d), float(m))
    print(f"{name:<14} {d:>7.4f} {m:>7.4f}   "
          f"{gate_ol(s, th).value:<7} {gate_dl(s, th).value:<7} {gate_ws(s, th).value}")

print("\n== gate quality per strategy (balanced accuracy on the test splits) ==")
for name, fn in (("ol", gate_ol), ("dl", gate_dl), ("ws", gate_ws)):
    seen_ok = np.mean([fn(GateStatistics(float(d), float(m)), th).value == "seen"
                       for d, m in zip(seen_dl, seen_msd)])
    unseen_ok = np.mean([fn(GateStatistics(float(d), float(m)), th).value == "unseen"
                         for d, m in zip(unseen_dl, unseen_msd)])
    print(f"{name}: seen recall {seen_ok:.3f}, unseen recall {unseen_ok:.3f}, "
          f"balanced {(seen_ok + unseen_ok) / 2:.3f}")
