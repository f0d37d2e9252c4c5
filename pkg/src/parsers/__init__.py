# Specification grammar
