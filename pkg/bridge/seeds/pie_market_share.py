import matplotlib.pyplot as plt

labels = ["Alpha", "Beta", "Gamma", "Other"]
share = [42, 27, 19, 12]

fig, ax = plt.subplots(figsize=(6.4, 4.8))
ax.pie(share, labels=labels, autopct="%1.0f%%", startangle=90)
ax.set_title("Market Share")
ax.legend(labels, loc="lower right", title="Vendor")
