# Extraction pipeline package
