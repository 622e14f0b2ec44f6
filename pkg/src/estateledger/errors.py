"""Single error type carrying a stable machine-readable code.

Codes are part of the external interface: the CLI maps them to exit
codes and scripts report them verbatim, so they must not be renamed.
"""


class LedgerError(Exception):
    def __init__(self, code: str, message: str = ""):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


def err(code: str, message: str = "") -> LedgerError:
    return LedgerError(code, message)
