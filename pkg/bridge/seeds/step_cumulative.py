import matplotlib.pyplot as plt

weeks = list(range(1, 11))
signups = [12, 30, 55, 90, 140, 180, 230, 260, 300, 350]

fig, ax = plt.subplots(figsize=(6.4, 4.8))
ax.step(weeks, signups, where="mid", color="#2ca02c", label="cumulative signups")
ax.set_title("Cumulative Signups")
ax.set_xlabel("Week")
ax.set_ylabel("Users")
ax.legend(loc="upper left")
ax.grid(True, alpha=0.3)
