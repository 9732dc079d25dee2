"""Exception hierarchy shared by all floorvec modules."""


class FloorvecError(Exception):
    """Base class for every error raised by this package."""


class MalformedXml(FloorvecError):
    pass


class MissingViewport(FloorvecError):
    pass


class BadPointList(FloorvecError):
    def __init__(self, index, text):
        super().__init__(f"element {index}: cannot parse points {text!r}")
        self.index = index
        self.text = text


class InvalidModel(FloorvecError):
    def __init__(self, report):
        lines = "; ".join(str(v) for v in report)
        super().__init__(f"model fails validation: {lines}")
        self.report = report


class DegenerateWallGraph(FloorvecError):
    pass


class PointOutOfFrame(FloorvecError):
    pass


class NoWallPixels(FloorvecError):
    pass


class ShapeMismatch(FloorvecError, ValueError):
    pass


class NonPositiveSigma(FloorvecError, ValueError):
    pass


class InvalidLabel(FloorvecError, ValueError):
    pass


class InfeasibleConfig(FloorvecError):
    pass


class FormatError(FloorvecError):
    """Raised for unreadable FPT1 / PNG / JSON inputs."""
