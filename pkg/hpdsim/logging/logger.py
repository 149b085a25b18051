# Copyright 2024 Efabless Corporation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import atexit
import logging
from enum import IntEnum
from typing import Iterable, Union

import numpy
import rich.console
import rich.logging
from rich.errors import MarkupError
from rich.text import Text


class LogLevels(IntEnum):
    ALL = 0
    DEBUG = 10
    TRACE = 12
    VERBOSE = 15
    INFO = 20
    WARNING = 30
    ERROR = 40
    CRITICAL = 50


# Markup prepended to the message per level
LEVEL_MARKUP = {
    'WARNING': '[yellow]',
    'ERROR': '[red]',
    'CRITICAL': '[red][bold]',
}

console = rich.console.Console()
atexit.register(lambda: rich.console.Console().show_cursor())
_logger: logging.Logger = logging.getLogger('__hpdsim__')


class ConsoleFormatter(logging.Formatter):
    def format(self, record):
        return LEVEL_MARKUP.get(record.levelname, '') + record.getMessage()


class FileFormatter(logging.Formatter):
    """Timestamped lines with the rich markup removed."""

    def __init__(self):
        super().__init__(
            '%(asctime)s %(levelname)-8s %(message)s', datefmt='%Y-%m-%d %H:%M:%S'
        )

    def formatMessage(self, record):
        try:
            record.message = Text.from_markup(record.message).plain
        except MarkupError:
            pass
        return super().formatMessage(record)


class LevelFilter(logging.Filter):
    """Passes only the named levels, or all others if ``invert`` is set."""

    def __init__(self, levels: Iterable[str], invert: bool = False) -> None:
        super().__init__()
        self.levels = set(levels)
        self.invert = invert

    def filter(self, record: logging.LogRecord) -> bool:
        return (record.levelname in self.levels) != self.invert


def initialize_logger():
    for level in LogLevels:
        logging.addLevelName(level.value, level.name)

    # Per iteration solver values, printed without markup or level column
    trace_handler = rich.logging.RichHandler(
        console=console,
        show_time=False,
        show_level=False,
        show_path=False,
        keywords=[],
        markup=False,
    )
    trace_handler.addFilter(LevelFilter(['TRACE']))

    rich_handler = rich.logging.RichHandler(
        console=console,
        rich_tracebacks=True,
        tracebacks_suppress=[numpy],
        omit_repeated_times=False,
        markup=True,
        keywords=[],
    )
    rich_handler.setFormatter(ConsoleFormatter('%(message)s', datefmt='[%X]'))
    rich_handler.addFilter(LevelFilter(['TRACE'], invert=True))

    _logger.setLevel(LogLevels.INFO)
    _logger.handlers.clear()
    _logger.addHandler(trace_handler)
    _logger.addHandler(rich_handler)


initialize_logger()


def register_additional_handler(handler: logging.Handler):
    """
    Adds a handler, e.g. a log file, to the hpdsim logger. Handlers
    without a formatter get the plain ``FileFormatter``.
    """
    if handler.formatter is None:
        handler.setFormatter(FileFormatter())
    _logger.addHandler(handler)


def deregister_additional_handler(handler: logging.Handler):
    _logger.removeHandler(handler)


def set_log_level(lv: Union[str, int]):
    """
    Sets the log level of the hpdsim logger.

    :param lv: Either the name or number of the desired log level.
    """
    _logger.setLevel(lv)


def reset_log_level():
    set_log_level('INFO')


def get_log_level() -> int:
    return _logger.getEffectiveLevel()


def _emit(level: int, msg: object, kwargs):
    # Report the caller of dbg/info/... as the origin
    kwargs.setdefault('stacklevel', 3)
    _logger.log(level, msg, **kwargs)


def dbg(msg: object, /, **kwargs):
    _emit(LogLevels.DEBUG, msg, kwargs)


def trace(msg: object, /, **kwargs):
    """Logs a per iteration solver value with the log level TRACE."""
    _emit(LogLevels.TRACE, msg, kwargs)


def verbose(msg: object, /, **kwargs):
    _emit(LogLevels.VERBOSE, msg, kwargs)


def info(msg: object, /, **kwargs):
    _emit(LogLevels.INFO, msg, kwargs)


def success(msg: object, /, **kwargs):
    """Logs with the log level INFO, highlighted in green."""
    _emit(LogLevels.INFO, f'[green]{msg}', kwargs)


def warn(msg: object, /, **kwargs):
    _emit(LogLevels.WARNING, msg, kwargs)


def err(msg: object, /, **kwargs):
    _emit(LogLevels.ERROR, msg, kwargs)


def rule(title: str = '', /, **kwargs):  # pragma: no cover
    """
    Prints a horizontal line enclosing ``title`` if the log level
    is INFO or lower. Kwargs are passed to ``rich.console.Console.rule``.
    """
    if get_log_level() <= LogLevels.INFO:
        console.rule(title, **kwargs)
