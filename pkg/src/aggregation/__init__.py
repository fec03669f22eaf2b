# High-level statistics package
