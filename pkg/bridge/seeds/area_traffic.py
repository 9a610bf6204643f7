import matplotlib.pyplot as plt

hours = list(range(24))
web = [2, 1, 1, 1, 1, 2, 4, 8, 12, 14, 15, 16, 16, 15, 14, 14, 15, 17, 16, 12, 9, 6, 4, 3]
mobile = [5, 4, 3, 3, 3, 4, 7, 10, 12, 12, 11, 12, 13, 12, 12, 13, 15, 18, 19, 17, 14, 11, 8, 6]

fig, ax = plt.subplots(figsize=(6.4, 4.8))
ax.stackplot(hours, web, mobile, labels=["Web", "Mobile"], colors=["#4878cf", "#ee854a"])
ax.set_title("Hourly Traffic by Platform")
ax.set_xlabel("Hour of Day")
ax.set_ylabel("Sessions (thousands)")
ax.legend(loc="upper left")
