# %% [markdown]
# # Sensitivity analysis of a mortality-rate series
#
# The bundled synthetic counts are turned into a definition-1 rate (deaths
# over cases 14 days earlier, in percent), screened for a unit root, and
# refitted under a grid of assumed error variances. The scale is
# `1 / (1 - 0.46)` by default, an assumed 46% under-ascertainment.

# %%
from errts import adf_test, screen, select_lag
from errts.io import bundled_dataset, mortality_rate
from errts.pipeline import SensitivitySpec, analyze, render

rate = mortality_rate(bundled_dataset(), definition=1)
print(len(rate), "observations from", rate.origin)
print("levels ADF p-value", round(adf_test(rate).p_value, 4))
res = screen(rate)
print("differencing order", res.diff_order, "ADF p-value", round(res.adf.p_value, 4))
print("AIC lag", select_lag(res.series, 5))

# %% [markdown]
# ## Additive and multiplicative grids

# %%
for kind, grid in (("additive", (0.1, 0.2)), ("multiplicative", (0.3, 0.6))):
    report = analyze(rate, SensitivitySpec(kind, grid, seed=1))
    print(render(report, "text"))

# %% [markdown]
# The same analysis is available from the shell:
#
# ```
# errts sensitivity --error multiplicative --grid 0.3,0.6 --format text
# ```
