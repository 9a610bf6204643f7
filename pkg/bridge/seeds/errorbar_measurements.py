import matplotlib.pyplot as plt

doses = [1, 2, 4, 8, 16]
response = [4.8, 9.1, 17.5, 33.0, 61.2]
spread = [0.6, 1.1, 2.0, 3.8, 7.5]

fig, ax = plt.subplots(figsize=(6.4, 4.8))
ax.errorbar(doses, response, yerr=spread, fmt="o-", capsize=4, label="trial mean")
ax.set_title("Dose Response Curve")
ax.set_xlabel("Dose (mg)")
ax.set_ylabel("Response")
ax.set_xscale("log", base=2)
ax.legend(loc="upper left")
