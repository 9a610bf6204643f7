import matplotlib.pyplot as plt

languages = ["Rust", "Go", "Python", "TypeScript", "Kotlin"]
satisfaction = [86, 71, 67, 64, 61]

fig, ax = plt.subplots(figsize=(6.4, 4.8))
ax.barh(languages, satisfaction, color="#956cb4", label="satisfied %")
ax.set_title("Language Satisfaction Survey")
ax.set_xlabel("Respondents (%)")
ax.set_ylabel("Language")
ax.legend(loc="lower right")
ax.invert_yaxis()
