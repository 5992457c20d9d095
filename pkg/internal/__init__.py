# Simulation and analysis engine
