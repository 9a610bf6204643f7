import matplotlib.pyplot as plt

months = list(range(1, 13))
city_a = [3, 4, 8, 13, 18, 22, 25, 24, 20, 14, 8, 4]
city_b = [-2, 0, 5, 11, 17, 21, 24, 23, 18, 11, 4, -1]

fig, ax = plt.subplots(figsize=(6.4, 4.8))
ax.plot(months, city_a, marker="o", label="Coastal")
ax.plot(months, city_b, marker="s", label="Inland")
ax.set_title("Monthly Mean Temperature")
ax.set_xlabel("Month")
ax.set_ylabel("Temperature (C)")
ax.legend(loc="lower center")
