import matplotlib.pyplot as plt

cohorts = {
    "North": [61, 64, 66, 68, 70, 71, 72, 74, 78, 83],
    "South": [55, 59, 62, 65, 66, 68, 70, 73, 77, 90],
    "East": [66, 69, 71, 72, 73, 75, 76, 78, 80, 82],
}

fig, ax = plt.subplots(figsize=(6.4, 4.8))
ax.boxplot(cohorts.values(), tick_labels=list(cohorts.keys()))
ax.set_title("Exam Scores by Region")
ax.set_xlabel("Region")
ax.set_ylabel("Score")
