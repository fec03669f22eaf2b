# Evaluation engine package
