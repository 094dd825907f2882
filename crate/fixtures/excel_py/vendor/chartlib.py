"""Stand-in chart library the analyzed code treats as external."""


class _Axis:
    def __init__(self):
        self.grid = None


class ChartClass:
    def __init__(self):
        self.title = ""
        self.x_axis = _Axis()
        self.y_axis = _Axis()


class ChartLines:
    pass
