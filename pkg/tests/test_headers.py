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

from pathlib import Path

import pytest

import vekua

PACKAGE_DIR = Path(vekua.__file__).parent
LICENSE_LINES = (
    '"""',
    'vekua-cascade: Warped analytic bases with a differentiable ridge solver',
    'Copyright (C) 2026 The vekua-cascade developers',
)


@pytest.mark.parametrize('path', sorted(PACKAGE_DIR.rglob('*.py')), ids=lambda p: str(p.relative_to(PACKAGE_DIR)))
def test_module_starts_with_license_header(path):
    lines = path.read_text(encoding='utf-8').splitlines()
    assert tuple(lines[:3]) == LICENSE_LINES
    assert 'GNU General Public License' in '\n'.join(lines[:17])
