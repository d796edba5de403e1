# Training-data selection under dataset shift
# Adversarial validation, a histogram GBDT, and an experiment grid driven by LangGraph
