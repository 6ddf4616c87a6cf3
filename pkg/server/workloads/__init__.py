"""
Workload generators and case studies run on the simulated machine
"""
