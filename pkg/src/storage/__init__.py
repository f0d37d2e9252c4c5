# Spec, environment and artifact files
