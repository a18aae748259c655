import os
import sys

from hypothesis import HealthCheck, settings

settings.register_profile("repo", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

# the acceptance file imports helpers from this directory
sys.path.insert(0, os.path.dirname(__file__))
