# Feature selection package
