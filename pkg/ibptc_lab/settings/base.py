import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()
# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SECRET_KEY', 'django-insecure-ibptc-lab-local-key')
# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} [{module} {lineno:d}] {message}',
            'style': '{'
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        '': {  # Пустая строка означает корневой логгер
            'handlers': ['console'],
            'level': 'INFO',
        },
        'django': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': False
        },
        'coding': {
            'handlers': ['console'],
            'level': os.environ.get('CODING_LOG_LEVEL', 'INFO'),
            'propagate': False
        },
        'experiments': {
            'handlers': ['console'],
            'level': os.environ.get('EXPERIMENTS_LOG_LEVEL', 'INFO'),
            'propagate': False
        },
    },
}

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'coding.apps.CodingConfig',
    'experiments.apps.ExperimentsConfig',
]

# Веб-интерфейса нет: сессии, сообщения и шаблоны нужны только админке реестра
MIDDLEWARE = [
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
]

ROOT_URLCONF = 'ibptc_lab.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'ibptc_lab.wsgi.application'

# Database
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

LANGUAGE_CODE = 'ru-RU'

TIME_ZONE = 'Europe/Moscow'

USE_I18N = True

USE_TZ = True

STATIC_URL = '/static/'

STATIC_ROOT = BASE_DIR / 'staticfiles'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Параллельный прогон испытаний: 0 означает os.cpu_count()
IBPTC_THREADS = int(os.environ.get('IBPTC_THREADS', '0'))

# Каталог по умолчанию для CSV и манифестов
IBPTC_RESULTS_DIR = Path(os.environ.get('IBPTC_RESULTS_DIR', BASE_DIR / 'results'))

# Ограничение LLR на входе SISO-декодера и для обмениваемой внешней информации
LLR_CLAMP = 50.0

# Скользящее окно: длина окна и длина разгона обратной рекурсии
SISO_WINDOW_LEN = 32
SISO_WARMUP_LEN = 32

SRANDOM_MAX_RESTARTS = 1000

# Правило остановки BER-моделирования
BER_MIN_BIT_ERRORS = 100
BER_MAX_BLOCKS = 1000
# Размер пачки испытаний не зависит от числа потоков, иначе правило остановки
# дало бы разные результаты при разном IBPTC_THREADS
BER_TRIAL_BATCH = 4

SNR_EVOLUTION_CAP = 1.0e6

J_FUNCTION_TOLERANCE = 1.0e-6
