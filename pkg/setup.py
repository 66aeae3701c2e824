from setuptools import setup, find_packages

setup(
    name="neural-scl",
    version="0.1.0",
    description="神经结构对应学习：跨领域情感分类的领域自适应",
    author="Neural SCL Team",
    author_email="example@example.com",
    packages=find_packages(exclude=["examples", "examples.*"]),
    include_package_data=True,
    install_requires=[
        "numpy",
        "scipy",
        "pyyaml",
        "python-dotenv",
        "tqdm",
        "tabulate",
    ],
    entry_points={
        'console_scripts': [
            'neural-scl=neural_scl.main:main',
        ],
    },
    python_requires='>=3.8',
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
)
