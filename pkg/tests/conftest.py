from hypothesis import settings

# one deterministic profile for every property test; numeric work can be slow
# under coverage so the deadline is off
settings.register_profile("dfoq", derandomize=True, deadline=None)
settings.load_profile("dfoq")
