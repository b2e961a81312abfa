"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Invalid parameters or malformed input. CLI exit code 2."""


class StarvedOutputsError(RuntimeError):
    """Output samples with (near-)zero normalization weight under the
    ``fail`` policy. CLI exit code 3.
    """

    def __init__(self, indices):
        self.indices = list(int(i) for i in indices)
        shown = ", ".join(str(i) for i in self.indices[:20])
        more = "" if len(self.indices) <= 20 else f", ... ({len(self.indices)} total)"
        super().__init__(f"starved output samples: {shown}{more}")
