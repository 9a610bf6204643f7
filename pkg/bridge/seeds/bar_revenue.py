import matplotlib.pyplot as plt

years = ["2020", "2021", "2022", "2023"]
revenue = [12.5, 15.1, 18.3, 21.0]

fig, ax = plt.subplots(figsize=(6.4, 4.8))
ax.bar(years, revenue, color="#4878cf", label="revenue")
ax.set_title("Revenue")
ax.set_xlabel("Year")
ax.set_ylabel("USD (millions)")
ax.legend(loc="upper left")
