import matplotlib.pyplot as plt

matrix = [
    [1.0, 0.8, 0.3, -0.1],
    [0.8, 1.0, 0.4, 0.0],
    [0.3, 0.4, 1.0, 0.6],
    [-0.1, 0.0, 0.6, 1.0],
]
names = ["A", "B", "C", "D"]

fig, ax = plt.subplots(figsize=(6.4, 4.8))
im = ax.imshow(matrix, cmap="viridis")
ax.set_xticks(range(4), names)
ax.set_yticks(range(4), names)
ax.set_title("Feature Correlation")
ax.set_xlabel("Feature")
ax.set_ylabel("Feature")
fig.colorbar(im, ax=ax)
