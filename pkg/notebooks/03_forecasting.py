# %% [markdown]
# # Forecasting from a contaminated last observation
#
# The forecast starts from the last observed value mapped back to the true
# scale. Its error carries into the MSPE through `phi1^(2h)`, which fades
# with the horizon while the innovation part accumulates.

# %%
import numpy as np

from errts import AdditiveError, ArModel, MultiplicativeError, monte_carlo_mspe, mspe
from errts.forecasting import make_forecast, mspe_path
from errts.montecarlo import SimSpec, simulate_ar

model = ArModel(1.0, (0.5,), 1.0)
for err in (AdditiveError(), AdditiveError(sigma_e2=0.5), MultiplicativeError(sigma_u2=0.5)):
    print(f"{err.kind:15s} {err.error_variance:4.2f}", np.round(mspe_path(model, err, 5), 4))

# %% [markdown]
# The closed form agrees with simulation, and for AR(2) only the simulated
# value is available.

# %%
err = MultiplicativeError(sigma_u2=0.5)
for h in (1, 2, 3):
    print(h, round(mspe(model, err, h), 4), round(monte_carlo_mspe(model, err, h, reps=50000, seed=h), 4))
ar2 = ArModel(1.0, (0.5, -0.3), 1.0)
print("AR(2) h=2", round(monte_carlo_mspe(ar2, AdditiveError(sigma_e2=0.5), 2, reps=50000), 4))

# %% [markdown]
# ## A forecast object

# %%
y = simulate_ar(SimSpec(model, 300, seed=4))
fc = make_forecast(model, y, AdditiveError(sigma_e2=0.5), H=5, alpha=0.05)
for h in range(fc.horizon):
    print(h + 1, f"{fc.points[h]:.3f}  [{fc.lower[h]:.3f}, {fc.upper[h]:.3f}]  MSPE {fc.mspe[h]:.3f}")
print("total MSPE", round(fc.mspe_total, 4))
