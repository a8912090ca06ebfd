class FakeStream:
    """Scripted uniform stream for deterministic variate tests."""

    def __init__(self, uniforms):
        self._uniforms = list(uniforms)
        self._i = 0

    def uniform(self):
        u = self._uniforms[self._i % len(self._uniforms)]
        self._i += 1
        return u
