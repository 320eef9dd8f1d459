# %% [markdown]
# # How measurement error biases a naive AR fit
#
# A stationary AR(1) is observed through an additive or a multiplicative
# error. Least squares on the observed series converges to a shrunken slope;
# the closed-form limits below are compared with simulation.

# %%
import numpy as np

from errts import AdditiveError, ArModel, MultiplicativeError, naive_limit_ar1_additive, naive_limit_ar1_multiplicative
from errts.montecarlo import SimSpec, naive_limit_experiment
from errts.naive import naive_limit_arp

model = ArModel(phi0=1.0, phi=(0.5,), sigma_eps2=1.0)
print("true parameters", dict(zip(model.param_names, model.params)))

# %% [markdown]
# ## Additive error
#
# With `X* = alpha0 + alpha1 X + e` the naive slope is multiplied by
# `gamma_0 alpha1^2 / (gamma_0 alpha1^2 + sigma_e2)`.

# %%
for s2 in (0.25, 0.5, 1.0, 2.0):
    err = AdditiveError(sigma_e2=s2)
    lim = naive_limit_ar1_additive(model, err)
    sim = naive_limit_experiment(SimSpec(model, 5000, seed=1), err, reps=100)
    print(f"sigma_e2={s2:4.2f}  limit phi1*={lim.phi_star[0]:.4f}  simulated {sim.mean[1]:.4f} +/- {sim.se[1]:.4f}")

# %% [markdown]
# ## Multiplicative error
#
# With `X* = beta0 u X` and `E u = 1`, the attenuation also depends on the
# mean of the process, so the drift matters.

# %%
for s2 in (0.3, 0.6, 1.0):
    err = MultiplicativeError(beta0=2.0, sigma_u2=s2)
    lim = naive_limit_ar1_multiplicative(model, err)
    sim = naive_limit_experiment(SimSpec(model, 5000, seed=2), err, reps=100)
    print(f"sigma_u2={s2:4.2f}  limit phi1*={lim.phi_star[0]:.4f}  simulated {sim.mean[1]:.4f} +/- {sim.se[1]:.4f}")

# %% [markdown]
# ## Higher order
#
# For AR(p) the limit solves the estimating equations with surrogate
# autocovariances; the coefficients no longer shrink by a common factor.

# %%
ar2 = ArModel(1.0, (0.5, -0.3), 1.0)
for err in (AdditiveError(sigma_e2=1.0), MultiplicativeError(beta0=2.0, sigma_u2=0.5)):
    lim = naive_limit_arp(ar2, err)
    sim = naive_limit_experiment(SimSpec(ar2, 5000, seed=3), err, reps=100)
    print(err.kind, "limit", np.round(lim.phi_star, 4), "simulated", np.round(sim.mean[1:3], 4))
