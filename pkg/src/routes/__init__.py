# HTTP routes for the pipeline stages
