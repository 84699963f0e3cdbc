#!/usr/bin/env python
# -*- coding: utf-8 -*-

from setuptools import setup

requirements = [
    'numpy',
    'scipy',
    'astropy',
    'lmfit',
    'six',
]

setup(
    name='lpmo',
    version='0.1dev',
    description='Numerical Littlewood-Paley square functions on Musielak-Orlicz Hardy spaces',
    long_description='Numerical Littlewood-Paley square functions with rough kernels on Musielak-Orlicz Hardy spaces, with a verification harness for their atom estimates.',
    author='lpmo developers',
    packages=[
        'lpmo',
    ],
    package_dir={'lpmo': 'lpmo'},
    scripts = ['verify.py'],
    install_requires=requirements,
    extras_require={
        'trace': ['psutil'],
        'tests': ['pytest', 'hypothesis'],
    },
    license='MIT',
)
