# Local feature extractors package
