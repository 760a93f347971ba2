from rest_framework import permissions, status, viewsets
from rest_framework.authtoken.models import Token
from rest_framework.decorators import action
from rest_framework.filters import OrderingFilter, SearchFilter
from rest_framework.response import Response
from rest_framework.views import APIView
from django_filters.rest_framework import DjangoFilterBackend

from .filters import SolutionRecordFilter
from .models import Experiment, SolutionRecord
from .serializers import ExperimentSerializer, SolutionRecordSerializer, SweepRowSerializer


class LogoutAPIView(APIView):
    permission_classes = [permissions.IsAuthenticated]

    def post(self, request, *args, **kwargs):
        try:
            request.user.auth_token.delete()
            return Response({"detail": "Successfully logged out."}, status=status.HTTP_200_OK)
        except (AttributeError, Token.DoesNotExist):
            return Response({"detail": "Invalid token or user not logged in."}, status=status.HTTP_400_BAD_REQUEST)


class ExperimentViewSet(viewsets.ReadOnlyModelViewSet):
    queryset = Experiment.objects.all().prefetch_related('sweep_rows')
    serializer_class = ExperimentSerializer
    permission_classes = [permissions.IsAuthenticated]
    filter_backends = [DjangoFilterBackend, SearchFilter, OrderingFilter]
    filterset_fields = ['kind', 'dimension', 'fiber_dimension']
    search_fields = ['name', 'archive_path']
    ordering_fields = ['updated_at', 'name']

    @action(detail=True, methods=['get'])
    def summary(self, request, pk=None):
        experiment = self.get_object()
        rows = SweepRowSerializer(experiment.sweep_rows.all(), many=True).data
        return Response({
            'experiment': experiment.name,
            'kind': experiment.kind,
            'ground_energy': experiment.ground_energy,
            'notes': experiment.notes,
            'rows': rows,
        })


class SolutionRecordViewSet(viewsets.ReadOnlyModelViewSet):
    queryset = SolutionRecord.objects.all().select_related('experiment')
    serializer_class = SolutionRecordSerializer
    permission_classes = [permissions.IsAuthenticated]
    filter_backends = [DjangoFilterBackend, OrderingFilter]
    filterset_class = SolutionRecordFilter
    ordering_fields = ['eps', 'energy', 'separation', 'record_id']
