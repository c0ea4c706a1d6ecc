"""
Quanvolutional filters: circuit generation, statevector simulation, memoized
image preprocessing, expressibility against the Haar ensemble and a small
classical head trained on the feature maps.
"""
from subprocess import Popen, PIPE

try:
    from setuptools import setup, find_packages
except ImportError:
    from distutils.core import setup, find_packages

with open('requirements.txt') as f:
    required = f.read().splitlines()

with open('dev-requirements.txt') as f:
    dev_required = f.read().splitlines()

def get_git_version(default="v0.0.1"):
    try:
        p = Popen(['git', 'describe', '--tags'], stdout=PIPE, stderr=PIPE)
        p.stderr.close()
        line = p.stdout.readlines()[0]
        line = line.strip()
        return line.decode()
    except:
        return default

setup(
    name='quanvolve',
    version=get_git_version(default="v0.0.1"),
    license='MIT',
    description='Quanvolutional neural network toolkit',
    long_description=__doc__,
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['alembic', 'alembic.*']),
    py_modules=['run', 'config'],
    zip_safe=False,
    include_package_data=True,
    platforms='any',
    install_requires=required,
    test_suite='quanvolve/tests',
    tests_require=dev_required,
    entry_points={
        'console_scripts': [
            'quanvolve=run:main',
        ],
    },
    classifiers=[
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Topic :: Scientific/Engineering :: Physics',
    ]
)
