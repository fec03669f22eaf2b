# Audio input package
