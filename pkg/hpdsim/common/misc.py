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
import os
import zlib
import typing
import pathlib

from numpy.random import SeedSequence


def mkdirp(path: typing.Union[str, os.PathLike]):
    """
    Attempts to create a directory and all of its parents.

    Does not fail if the directory already exists, however, it does fail
    if it is unable to create any of the components and/or if the path
    already exists as a file.

    :param path: A filesystem path for the directory
    """
    return pathlib.Path(path).mkdir(parents=True, exist_ok=True)


def name_key(name: str) -> int:
    """
    Integer key for a name, identical in every process unlike ``hash``.
    """
    return zlib.crc32(name.encode('utf-8'))


def derive_seed(*entropy: typing.Union[int, str]) -> int:
    """
    Derives a 63 bit seed from a mix of integers and names.

    :param entropy: Master seed, trial index, scheme name, ...
    :returns: A seed usable for ``numpy.random.default_rng``
    """
    words = [name_key(e) if isinstance(e, str) else int(e) for e in entropy]
    state = SeedSequence(words).generate_state(2, dtype='uint32')
    return (int(state[0]) << 31) ^ int(state[1])
