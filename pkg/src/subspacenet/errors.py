"""Exception hierarchy. ``exit_code`` is what the CLI returns for each failure."""


class SubspaceNetError(Exception):
    exit_code = 1


class ConfigError(SubspaceNetError):
    exit_code = 2


class ConnectivityError(SubspaceNetError):
    """No connected graph was drawn within the retry budget."""
    exit_code = 2


class InfeasibleDesignError(SubspaceNetError):
    exit_code = 3

    def __init__(self, message, report=None, added_edges=()):
        super().__init__(message)
        self.report = report
        self.added_edges = list(added_edges)

    def __reduce__(self):
        return type(self), (self.args[0], self.report, self.added_edges)


class ConvergenceError(SubspaceNetError):
    exit_code = 3

    def __init__(self, message, iterations=None, step_residual=None, omega_residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.step_residual = step_residual
        self.omega_residual = omega_residual

    def __reduce__(self):
        return type(self), (self.args[0], self.iterations, self.step_residual, self.omega_residual)


class DivergenceError(SubspaceNetError):
    exit_code = 4

    def __init__(self, message, iteration=None, run=None, strategy=None):
        super().__init__(message)
        self.iteration = iteration
        self.run = run
        self.strategy = strategy

    # raised inside Monte-Carlo worker processes
    def __reduce__(self):
        return type(self), (self.args[0], self.iteration, self.run, self.strategy)


class InstabilityError(SubspaceNetError):
    exit_code = 4

    def __init__(self, message, rho=None):
        super().__init__(message)
        self.rho = rho

    def __reduce__(self):
        return type(self), (self.args[0], self.rho)


class StabilityWarning(RuntimeWarning):
    pass
