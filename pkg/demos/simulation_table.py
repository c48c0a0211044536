"""
A small replication table
=========================

Run a few replications of the independent design at two sparsity ratios
and print the table as ``mean(sd)`` cells. Bump ``replications`` to 100
for the full protocol (a few minutes per setting).
"""
from nsireg.harness import ExperimentSpec, run_replications
from nsireg.simulate import SimulationConfig

spec = ExperimentSpec(
    design=SimulationConfig(n=100, p=50, q=50),
    sweep=[("ratio", [0.5, 0.8])],
    methods=("nsi", "lasso", "plugin"),
    replications=5,
)
rows = run_replications(spec)

print(f"{'setting':12s} {'method':7s} {'l2':>18s} {'FPR':>16s} {'TPR':>16s} {'NZ':>16s}")
for r in rows:
    print(f"{r.setting:12s} {r.method:7s} " + " ".join(f"{r.cell(m):>16s}"
                                                       for m in ("l2", "fpr", "tpr", "nz")))
