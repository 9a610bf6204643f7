import matplotlib.pyplot as plt

samples = [12, 15, 15, 17, 18, 18, 18, 20, 21, 21, 22, 22, 23, 25, 25,
           26, 28, 28, 30, 31, 33, 35, 38, 41, 45, 52, 60, 72, 85, 110]

fig, ax = plt.subplots(figsize=(6.4, 4.8))
ax.hist(samples, bins=8, color="#6acc65", edgecolor="black", label="requests")
ax.set_title("Response Time Distribution")
ax.set_xlabel("Latency (ms)")
ax.set_ylabel("Count")
ax.legend()
