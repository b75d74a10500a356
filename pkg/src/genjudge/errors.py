"""Exception hierarchy.

Every failure raised by the library derives from :class:`GenJudgeError` so
callers (the CLI in particular) can map them onto exit codes.
"""

from __future__ import annotations


class GenJudgeError(Exception):
    pass


# graph core / I/O

class GraphFormatError(GenJudgeError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedLine(GraphFormatError):
    pass


class SelfLoop(GraphFormatError):
    pass


class EmptyInput(GraphFormatError):
    pass


class InvalidGraph(GenJudgeError):
    pass


class NotAPermutation(GenJudgeError):
    pass


class DatasetError(GenJudgeError):
    pass


class MissingFile(DatasetError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"missing file: {path}")


class MixedLabeling(DatasetError):
    pass


class ManifestSchemaError(DatasetError):
    pass


# generators

class GeneratorError(GenJudgeError):
    pass


class InvalidParams(GeneratorError):
    pass


class UnfittableFamily(GeneratorError):
    pass


class Unrealizable(GeneratorError):
    pass


class RetriesExhausted(GeneratorError):
    pass


class TooFewEdges(GeneratorError):
    pass


class NotEnoughExternalGraphs(GeneratorError):
    pass


# graphlets / kernels

class UnsupportedSize(GenJudgeError):
    pass


class DimensionMismatch(GenJudgeError):
    pass


class NoValidSample(GenJudgeError):
    pass


class EmptyFeatureMatrix(GenJudgeError):
    pass


class ZeroDiagonal(GenJudgeError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"zero self-similarity for graph {index}")


class DegenerateCorpus(GenJudgeError):
    pass


class NonFinite(GenJudgeError):
    pass


# classifier

class SingleClass(GenJudgeError):
    pass


class NotPsd(GenJudgeError):
    pass


class TooManyFolds(GenJudgeError):
    pass


class FoldDegenerate(GenJudgeError):
    pass


class ConvergenceWarning(UserWarning):
    pass


# evaluator

class OutOfRange(GenJudgeError):
    pass


class LabelConflict(GenJudgeError):
    pass


class StageError(GenJudgeError):
    """A pipeline failure annotated with the stage and trial it came from."""

    def __init__(self, stage: str, cause: BaseException, trial: int | None = None):
        self.stage = stage
        self.trial = trial
        self.cause = cause
        where = stage if trial is None else f"{stage} (trial {trial})"
        super().__init__(f"{where}: {type(cause).__name__}: {cause}")
