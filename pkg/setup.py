#!/usr/bin/env python
# Copyright 2024 by the corrlab authors.
# Licensed under the Apache 2.0 License.
"""Setup script for the corrlab distribution. Note that we only
package up the python code. The tests and docs are kept only in the
full source repository.
"""

import re

#We try setuptools first (which has more features), and
# fallback to distutils if setuptools was not installed.
try:
    from setuptools import setup
except ImportError:
    print("Did not find setuptools, using distutils instead")
    from distutils.core import setup

with open('corrlab/__init__.py') as f:
    __version__ = re.search(r'__version__ = "([^"]+)"', f.read()).group(1)

DESCRIPTION =\
"""
corrlab computes correlation (Gram) matrices of tuples of unitaries in
finite-dimensional von Neumann algebras with a tracial state. It builds the
exact symmetry quadruples and the eight-unitary witness whose Gram matrices
converge to a matrix no finite-dimensional tuple realizes, evaluates the
certificate values and determinant obstruction behind that fact, and tests
membership numerically by Riemannian descent on products of unitary groups.

corrlab is Python 3 on top of NumPy and SciPy. Sweeps and the end-to-end
check run as small push-based dataflows and write JSON and CSV files.
"""

setup(name='corrlab',
      version=__version__,
      description="Correlation matrices of unitaries in finite-dimensional tracial algebras",
      long_description=DESCRIPTION,
      license="Apache 2.0",
      author="The corrlab authors",
      packages=['corrlab', 'corrlab.filters', 'corrlab.adapters'],
      python_requires='>=3.6',
      install_requires=['numpy>=1.17', 'scipy>=1.0'],
      extras_require={'pandas': ['pandas>=0.25']},
      entry_points={'console_scripts': ['corrlab = corrlab.cli:main']},
      classifiers = [
          'Development Status :: 4 - Beta',
          'License :: OSI Approved :: Apache Software License',
          'Programming Language :: Python :: 3',
          'Operating System :: OS Independent',
          'Intended Audience :: Science/Research',
          'Topic :: Scientific/Engineering :: Mathematics',
      ],
      keywords = ['operator algebras', 'correlation matrices', 'unitary groups'],
)
