#!/usr/bin/env python
# -*- coding: utf-8 -*-

from setuptools import find_packages, setup

requirements = [
    'numpy>=1.26',
    'scipy>=1.10',
    'psutil>=5.9.0',
]

setup(
    name='rana-frog',
    version='1.0.0',
    description='PG/TG FROG simulation and multi-grid pulse retrieval',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    python_requires='>=3.9.0',
    packages=find_packages(exclude=['examples', 'examples.*']),
    zip_safe=False,
    install_requires=requirements,
    extras_require={
        'test': ['pytest>=7.0'],
    },
    include_package_data=True,
    entry_points={
        'console_scripts': [
            'ranafrog=ranafrog:main'
        ]
    },
    license='MIT',
    classifiers=[
        # Trove classifiers
        # Full list: https://pypi.python.org/pypi?%3Aaction=list_classifiers
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: Implementation :: CPython',
        'Topic :: Scientific/Engineering :: Physics'
    ]
)
