from django.urls import path, include
from rest_framework.routers import DefaultRouter
from rest_framework.authtoken.views import obtain_auth_token

from .views import ExperimentViewSet, LogoutAPIView, SolutionRecordViewSet

router = DefaultRouter()
router.register(r'experiments', ExperimentViewSet, basename='experiment')
router.register(r'records', SolutionRecordViewSet, basename='record')

urlpatterns = [
    path('', include(router.urls)),

    # Auth
    path('auth/login/', obtain_auth_token, name='auth-login'),
    path('auth/logout/', LogoutAPIView.as_view(), name='auth-logout'),
]
