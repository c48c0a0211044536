"""
Estimating a tridiagonal precision matrix
=========================================

Sample from a Gaussian whose precision is tridiagonal and recover it with
the graphical lasso at the default penalty rule, and at a few hand-picked
penalties to see the support shrink.
"""
import numpy as np

from nsireg.linalg import cholesky, gaussian_sample, sample_covariance, spd_inverse
from nsireg.precision import glasso_kkt_residual, glasso_lambda_rule, graphical_lasso
from nsireg.simulate import make_tridiagonal_precision

q, n = 10, 500
omega = make_tridiagonal_precision(q, 0.4)
X = gaussian_sample(cholesky(spd_inverse(omega)), n, 0)
S = sample_covariance(X, center=True)

lam_star = glasso_lambda_rule(n, q)
print(f"rule penalty for n={n}, q={q}: {lam_star:.3f}")

for lam in [0.02, 0.05, 0.1, 0.2, lam_star]:
    est = graphical_lasso(S, lam)
    off = est.omega_hat[np.triu_indices(q, 1)]
    print(f"lam={lam:6.3f}  nonzero off-diagonals={np.count_nonzero(off):2d}  "
          f"KKT residual={glasso_kkt_residual(S, est.omega_hat, lam):.1e}  "
          f"max error={np.abs(est.omega_hat - omega).max():.3f}")

# true support has q - 1 = 9 off-diagonal entries
np.set_printoptions(precision=2, suppress=True)
print(graphical_lasso(S, 0.05).omega_hat[:4, :4])
