import matplotlib.pyplot as plt

quarters = ["Q1", "Q2", "Q3", "Q4"]
product_x = [20, 34, 30, 35]
product_y = [25, 32, 34, 20]
positions = range(len(quarters))
width = 0.35

fig, ax = plt.subplots(figsize=(6.4, 4.8))
ax.bar([p - width / 2 for p in positions], product_x, width, label="Product X")
ax.bar([p + width / 2 for p in positions], product_y, width, label="Product Y")
ax.set_xticks(list(positions), quarters)
ax.set_title("Quarterly Sales")
ax.set_xlabel("Quarter")
ax.set_ylabel("Units (thousands)")
ax.legend(loc="upper right")
