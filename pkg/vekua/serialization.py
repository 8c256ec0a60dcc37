"""
vekua-cascade: Warped analytic bases with a differentiable ridge solver
Copyright (C) 2026 The vekua-cascade developers

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
GNU General Public License for more details.

You should have received a copy of the GNU General Public License
along with this program. If not, see <http://www.gnu.org/licenses/>.
"""

import gzip
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Union

import dateutil.parser
import numpy as np
from lxml import etree

from vekua.basis import FrequencyBank
from vekua.cascade import Block, CascadeModel
from vekua.exceptions import ModelFormatException
from vekua.utils import format_float
from vekua.warp import WarpParams

FORMAT_VERSION = '1'
NAMESPACE = 'https://vekua-cascade.invalid/model/v1'
ALL_NAMESPACES = {'vekua': NAMESPACE}

EMPTY_MODEL = f"""<?xml version="1.0" encoding="UTF-8"?>
<vekua:Model xmlns:vekua="{NAMESPACE}" format-version="{FORMAT_VERSION}" in_dim="1">
  <vekua:Created></vekua:Created>
  <vekua:Blocks/>
</vekua:Model>
""".encode()

_ARRAYS = ('W', 'b', 'W_out', 'omega_re', 'omega_im', 'w')


def _tag(name: str) -> str:
    return '{%s}%s' % (NAMESPACE, name)


def _add_array(parent, name: str, values: np.ndarray):
    element = etree.SubElement(parent, _tag('Array'), name=name, shape=' '.join(str(s) for s in values.shape))
    element.text = ' '.join(format_float(v) for v in values.ravel())
    return element


def _float_attribute(element, name: str) -> float:
    value = element.get(name)
    try:
        return float(value)
    except (TypeError, ValueError) as ex:
        raise ModelFormatException(f'Block {element.get("index")} has no numeric "{name}" attribute: {value!r}') from ex


def _read_array(element) -> np.ndarray:
    shape = tuple(int(s) for s in element.get('shape').split())
    text = element.text or ''
    values = np.array([float(v) for v in text.split()], dtype=np.float64)
    if values.size != int(np.prod(shape)):
        raise ModelFormatException(f'Array "{element.get("name")}" holds {values.size} values for shape {shape}')
    return values.reshape(shape)


class ModelDocument:
    """
    XML form of a `CascadeModel`.  Floats are stored as shortest round-trip decimals, so loading reproduces every value
    bit for bit.
    """

    def __init__(self, model_root_element=None):
        self._ns = ALL_NAMESPACES
        if model_root_element is None:
            self.__root = etree.fromstring(EMPTY_MODEL)
            self.creation_date = datetime.now(timezone.utc)
        else:
            self.__root = model_root_element
            if self.version != FORMAT_VERSION:
                raise ModelFormatException(f'Unsupported model format version: {self.version}')

    def __created_element(self):
        return self.__root.find('vekua:Created', self._ns)

    def __blocks_element(self):
        return self.__root.find('vekua:Blocks', self._ns)

    @property
    def version(self) -> str:
        """
        The format version of the document
        """
        return self.__root.get('format-version')

    @property
    def in_dim(self) -> int:
        return int(self.__root.get('in_dim'))

    def get_creation_date(self) -> datetime:
        return dateutil.parser.parse(self.__created_element().text)

    def set_creation_date(self, creation_datetime: datetime) -> None:
        self.__created_element().text = creation_datetime.isoformat()

    creation_date = property(get_creation_date, set_creation_date)

    def __len__(self) -> int:
        """
        The number of blocks in the document
        """
        return len(self.__blocks_element())

    @classmethod
    def from_model(cls, model: CascadeModel) -> 'ModelDocument':
        document = cls()
        document.__root.set('in_dim', str(model.in_dim))
        blocks = document.__blocks_element()
        for index, block in enumerate(model.blocks):
            element = etree.SubElement(
                blocks,
                _tag('Block'),
                index=str(index),
                lam=format_float(block.lam),
                warp_scale=format_float(block.warp.scale),
            )
            arrays = (block.warp.W, block.warp.b, block.warp.W_out, block.bank.omega_re, block.bank.omega_im, block.w)
            for name, values in zip(_ARRAYS, arrays):
                _add_array(element, name, values)
        return document

    def to_model(self) -> CascadeModel:
        blocks: List[Block] = []
        for element in self.__blocks_element().findall('vekua:Block', self._ns):
            arrays = {a.get('name'): _read_array(a) for a in element.findall('vekua:Array', self._ns)}
            missing = [name for name in _ARRAYS if name not in arrays]
            if missing:
                raise ModelFormatException(f'Block {element.get("index")} is missing arrays: {", ".join(missing)}')
            warp = WarpParams(arrays['W'], arrays['b'], arrays['W_out'], _float_attribute(element, 'warp_scale'))
            bank = FrequencyBank(arrays['omega_re'], arrays['omega_im'])
            blocks.append(Block(warp, bank, arrays['w'], _float_attribute(element, 'lam')))
        return CascadeModel(self.in_dim, tuple(blocks))

    def save(self, filepath: Union[str, Path], *, compress: int = 9) -> None:
        """
        Save the document to `filepath`.

        :param compress: gzip compression level from 0 to 9 (default).  A `False` value writes plain XML.
        """
        xml = etree.tostring(self.__root, xml_declaration=True, encoding='UTF-8')

        if compress is False:
            with open(filepath, mode='wb') as fout:
                fout.write(xml)
        else:
            with gzip.open(filepath, mode='wb', compresslevel=compress) as fout:
                fout.write(xml)

    @classmethod
    def load(cls, filepath: Union[str, Path]) -> 'ModelDocument':
        """
        Read a saved model.  Paths ending in `.xml` are read as plain XML, anything else as gzip-compressed XML.

        :raises ModelFormatException: When the file is not a model document of a supported version
        """
        filepath = str(filepath)

        if filepath.lower().endswith('.xml'):
            open_method = open
        else:
            open_method = gzip.open

        try:
            with open_method(filepath, mode='rb') as fin:
                contents = fin.read()
        except gzip.BadGzipFile as ex:
            raise ModelFormatException(f'Not a compressed model document: {filepath}') from ex

        try:
            root = etree.fromstring(contents)
        except etree.XMLSyntaxError as ex:
            raise ModelFormatException(f'Not a model document: {filepath}') from ex
        if root.tag != _tag('Model'):
            raise ModelFormatException(f'Unexpected root element {root.tag} in {filepath}')
        return cls(root)


def save_model(model: CascadeModel, filepath: Union[str, Path], *, compress: int = 9) -> None:
    ModelDocument.from_model(model).save(filepath, compress=compress)


def load_model(filepath: Union[str, Path]) -> CascadeModel:
    return ModelDocument.load(filepath).to_model()
