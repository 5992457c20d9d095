# Command-line actions
