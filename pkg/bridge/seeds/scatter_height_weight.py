import matplotlib.pyplot as plt

heights = [150, 155, 160, 165, 170, 175, 180, 185, 190]
weights = [50, 54, 58, 63, 68, 73, 79, 84, 90]

fig, ax = plt.subplots(figsize=(6.4, 4.8))
ax.scatter(heights, weights, c="#d65f5f", label="adults")
ax.set_title("Height vs Weight")
ax.set_xlabel("Height (cm)")
ax.set_ylabel("Weight (kg)")
ax.legend()
