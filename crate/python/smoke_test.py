"""Quick end-to-end check of the pyqwalk extension module."""

import math

import pyqwalk as qw

hadamard = qw.WalkConfig.hadamard()
assert hadamard.dimension == 1 and hadamard.coin_size == 2 and hadamard.scale == 1

start = qw.PureState.localized([0], [1, 0])
dist = qw.simulate(hadamard, qw.Ensemble.pure(start), 3, raw=True)
expected = {(-3,): 0.125, (-1,): 0.125, (1,): 0.625, (3,): 0.125}
for key, mass in dist.masses().items():
    assert abs(mass - expected[key]) < 1e-12, (key, mass)

spec = qw.eigensystem(hadamard, [0.0])
assert all(abs(abs(lam) - 1) < 1e-12 for lam in spec.eigenvalues)
assert abs(max(abs(v[0]) for v in spec.velocities) - 1 / math.sqrt(2)) < 1e-12

ballistic = qw.WalkConfig.ballistic([[(3, 2)], [-1]])
assert ballistic.scale == 2
lm = qw.limit_measure(ballistic, qw.Ensemble.origin_mixed(1, 2), 256).merged()
assert sorted(v[0] for v, _ in lm.atoms()) == [-1.0, 1.5]

mixed = qw.Ensemble.origin_mixed(1, 2)
limit = qw.limit_measure(hadamard, mixed, 1024)
samples = qw.sample_limit(hadamard, 2000, 7)
assert samples == qw.sample_limit(hadamard, 2000, 7)
step = 1.0 / len(samples)
empirical = [(s[0], step) for s in samples]
atoms = [(v[0], m) for v, m in limit.normalized().atoms()]
assert qw.ks_distance(empirical, atoms) < 0.05

rows = qw.convergence_series(hadamard, qw.Ensemble.pure(start), [50, 200], 1024)
assert rows[1]["ks"] < rows[0]["ks"]

try:
    qw.WalkConfig([[1], [-1]], [[1, 1], [0, 1]])
except ValueError as e:
    assert "unitary" in str(e)
else:
    raise AssertionError("non-unitary coin accepted")

print("pyqwalk smoke test ok")
