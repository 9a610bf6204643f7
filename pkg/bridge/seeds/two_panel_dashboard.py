import matplotlib.pyplot as plt

years = ["2020", "2021", "2022"]
revenue = [12.5, 15.1, 18.3]
growth = [1.0, 2.1, 2.8]

fig, (left, right) = plt.subplots(1, 2, figsize=(8, 4))
left.bar(years, revenue, color="#4878cf", label="revenue")
left.set_title("Revenue")
left.set_xlabel("Year")
left.set_ylabel("USD (millions)")
left.legend(loc="upper left")

right.plot(years, growth, marker="o", color="#d65f5f", label="growth")
right.set_title("Growth")
right.set_xlabel("Year")
right.set_ylabel("Rate (%)")
right.legend(loc="lower right")
fig.tight_layout()
