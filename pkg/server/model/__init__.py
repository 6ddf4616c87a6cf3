"""
Machine models: topology, routing, network simulation, core throughput and energy
"""
