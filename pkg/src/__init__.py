# VoxPath main package
